#include "roughmarkov/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "roughmarkov/errors.hpp"
#include "roughmarkov/math_core.hpp"

namespace roughmarkov {

KernelSpec::KernelSpec(double H_, double T_) : H(H_), T(T_) {
    if (!(H > -0.5 && H <= 0.5)) throw DomainError("KernelSpec: H must lie in (-1/2, 1/2]");
    if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("KernelSpec: T must be positive");
}

double KernelSpec::c_H() const {
    if (is_constant()) throw DomainError("c_H is not defined at H = 1/2");
    return 1.0 / (gamma(H + 0.5) * gamma(0.5 - H));
}

double KernelSpec::norm_l1() const { return std::pow(T, H + 0.5) / gamma(H + 1.5); }

QuadratureRule::QuadratureRule(std::vector<double> x, std::vector<double> w)
    : nodes(std::move(x)), weights(std::move(w)) {
    if (nodes.size() != weights.size()) throw DomainError("QuadratureRule: nodes and weights differ in length");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!std::isfinite(nodes[i]) || !std::isfinite(weights[i]) || nodes[i] < 0.0 || weights[i] < 0.0)
            throw DomainError("QuadratureRule: entries must be finite and nonnegative");
        if (i > 0 && !(nodes[i] > nodes[i - 1]))
            throw DomainError("QuadratureRule: nodes must be strictly ascending");
    }
}

QuadratureRule QuadratureRule::from_unsorted(std::vector<double> x, std::vector<double> w) {
    if (x.size() != w.size()) throw DomainError("QuadratureRule: nodes and weights differ in length");
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> xs, ws;
    for (std::size_t i : idx) {
        if (!xs.empty() && xs.back() == x[i]) {
            ws.back() += w[i];
        } else {
            xs.push_back(x[i]);
            ws.push_back(w[i]);
        }
    }
    return QuadratureRule(std::move(xs), std::move(ws));
}

double eval_K(const KernelSpec& spec, double t) {
    if (spec.is_constant()) return 1.0;
    if (!(t > 0.0)) throw DomainError("eval_K: kernel is singular at t = 0");
    return std::pow(t, spec.H - 0.5) / gamma(spec.H + 0.5);
}

double eval_KN(const QuadratureRule& rule, double t) {
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weights[i] * std::exp(-rule.nodes[i] * t);
    return s;
}

namespace {

// (1 - e^{-x d}) / x with the x = 0 limit d.
double phi1(double x, double d) { return decay_integral(x, d); }

struct Taylor {
    double f, d1, d2;
};

}  // namespace

double l1_error_lower_biased(const KernelSpec& spec, const QuadratureRule& rule) {
    double s = spec.norm_l1();
    for (std::size_t i = 0; i < rule.size(); ++i) s -= rule.weights[i] * phi1(rule.nodes[i], spec.T);
    return s;
}

ErrorReport l1_error_intersections(const KernelSpec& spec, const QuadratureRule& rule, double tol) {
    if (!(tol > 1e-12 && tol < 1.0)) throw DomainError("l1_error_intersections: tol must lie in (1e-12, 1)");
    const double H = spec.H, T = spec.T;
    const double gH = gamma(H + 0.5);
    ErrorReport rep;
    rep.tolerance_used = tol;

    auto K = [&](double t) -> Taylor {
        ++rep.kernel_evaluations;
        if (spec.is_constant()) return {1.0, 0.0, 0.0};
        double k = std::pow(t, H - 0.5) / gH;
        return {k, k * (H - 0.5) / t, k * (H - 0.5) * (H - 1.5) / (t * t)};
    };
    auto KN = [&](double t) -> Taylor {
        ++rep.kernel_evaluations;
        Taylor r{0.0, 0.0, 0.0};
        for (std::size_t i = 0; i < rule.size(); ++i) {
            double x = rule.nodes[i], e = rule.weights[i] * std::exp(-x * t);
            if (e == 0.0) continue;  // x*x may overflow for huge nodes
            r.f += e;
            r.d1 -= x * e;
            r.d2 += (x * e) * x;
        }
        return r;
    };

    double kn0 = eval_KN(rule, 0.0);
    double s = 0.0;
    int sign = 1;
    if (!spec.is_constant()) {
        if (kn0 == 0.0) {
            s = T;
        } else {
            // K(t_hat) = K^N(0) >= K^N(t) for t >= 0: no crossing before t_hat
            s = std::min(T, std::pow(gH * kn0, 1.0 / (H - 0.5)));
        }
    } else {
        double g = 1.0 - kn0;
        if (g < 0.0) sign = -1;
    }

    const double eps = std::numeric_limits<double>::epsilon();
    long steps = 0;
    while (s < T) {
        if (++steps > 50'000'000) throw ConvergenceError("l1_error_intersections: step budget exhausted");
        Taylor k = (spec.is_constant() || s > 0.0) ? K(s) : Taylor{1.0, 0.0, 0.0};
        Taylor n = KN(s);
        double gap = k.f - n.f;
        double tau;
        if (std::abs(gap) > tol * k.f) {
            // tangent of the larger function against the quadratic Taylor of the smaller one
            const Taylor& up = gap > 0.0 ? k : n;
            const Taylor& lo = gap > 0.0 ? n : k;
            double A = 0.5 * lo.d2, B = lo.d1 - up.d1, C = lo.f - up.f;
            if (!std::isfinite(A) || !std::isfinite(B))
                throw ConvergenceError("l1_error_intersections: kernel derivatives overflow");
            if (A > 0.0) {
                double disc = std::sqrt(B * B - 4.0 * A * C);
                tau = B > 0.0 ? -2.0 * C / (B + disc) : (-B + disc) / (2.0 * A);
            } else {
                tau = B > 0.0 ? -C / B : std::numeric_limits<double>::infinity();
            }
        } else {
            double rho = n.f / k.f;
            double d1 = n.d1 != 0.0 ? tol * k.f / std::abs(n.d1) : std::numeric_limits<double>::infinity();
            double d2 = k.d1 != 0.0 ? tol * k.f / ((rho + tol) * std::abs(k.d1))
                                    : std::numeric_limits<double>::infinity();
            tau = std::min(d1, d2);
        }
        if (!(tau > 4.0 * eps * std::max(s, eps * T)))
            throw ConvergenceError("l1_error_intersections: failed to advance");
        double t = std::min(T, s + tau);
        double g = K(t).f - KN(t).f;
        int new_sign = g > 0.0 ? 1 : (g < 0.0 ? -1 : sign);
        if (new_sign != sign) {
            rep.crossings.push_back(0.5 * (s + t));
            sign = new_sign;
        }
        s = t;
    }

    std::vector<double> pts;
    pts.push_back(0.0);
    pts.insert(pts.end(), rep.crossings.begin(), rep.crossings.end());
    pts.push_back(T);
    const double gH1 = gamma(H + 1.5);
    double total = 0.0;
    for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
        double u = pts[j], v = pts[j + 1];
        double ik = spec.is_constant() ? v - u : (std::pow(v, H + 0.5) - std::pow(u, H + 0.5)) / gH1;
        double ikn = 0.0;
        for (std::size_t i = 0; i < rule.size(); ++i)
            ikn += rule.weights[i] * std::exp(-rule.nodes[i] * u) * phi1(rule.nodes[i], v - u);
        total += std::abs(ik - ikn);
    }
    rep.absolute_l1 = total;
    rep.relative_l1 = total / spec.norm_l1();
    return rep;
}

double norm_l2(const KernelSpec& spec) {
    if (!(spec.H > 0.0)) throw DomainError("L2 norm of K is infinite for H <= 0");
    double g = gamma(spec.H + 0.5);
    return std::pow(spec.T, spec.H) / (std::sqrt(2.0 * spec.H) * g);
}

double l2_error(const KernelSpec& spec, const QuadratureRule& rule) {
    if (!(spec.H > 0.0)) throw DomainError("l2_error: requires H > 0");
    const double H = spec.H, T = spec.T, g = gamma(H + 0.5);
    double kk = std::pow(T, 2.0 * H) / (2.0 * H * g * g);
    double cross = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        double x = rule.nodes[i];
        double b = x == 0.0 ? std::pow(T, H + 0.5) / ((H + 0.5) * g)
                            : std::pow(x, -H - 0.5) * lower_incomplete_gamma(H + 0.5, x * T) / g;
        cross += rule.weights[i] * b;
    }
    double gram = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i)
        for (std::size_t j = 0; j < rule.size(); ++j)
            gram += rule.weights[i] * rule.weights[j] * phi1(rule.nodes[i] + rule.nodes[j], T);
    return std::sqrt(std::max(0.0, kk - 2.0 * cross + gram));
}

std::string rule_to_json(const KernelSpec& spec, const QuadratureRule& rule) {
    nlohmann::json j;
    j["H"] = spec.H;
    j["T"] = spec.T;
    j["nodes"] = rule.nodes;
    j["weights"] = rule.weights;
    return j.dump(2);
}

QuadratureRule rule_from_json(const std::string& text, KernelSpec* spec_out) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
        QuadratureRule r(j.at("nodes").get<std::vector<double>>(), j.at("weights").get<std::vector<double>>());
        if (spec_out) *spec_out = KernelSpec(j.at("H").get<double>(), j.at("T").get<double>());
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed rule JSON: ") + e.what());
    }
}

void write_rule_file(const std::string& path, const KernelSpec& spec, const QuadratureRule& rule) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << rule_to_json(spec, rule) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

QuadratureRule read_rule_file(const std::string& path, KernelSpec* spec_out) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return rule_from_json(ss.str(), spec_out);
}

}  // namespace roughmarkov
