#include "roughmarkov/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>
#include <boost/multiprecision/mpfr.hpp>

#include "roughmarkov/config.hpp"
#include "roughmarkov/errors.hpp"
#include "roughmarkov/math_core.hpp"

namespace roughmarkov {

NodesWeights gauss_legendre(int m, double a, double b) {
    if (m < 1 || m > 64) throw DomainError("gauss_legendre: level must be in [1, 64]");
    if (!(b > a)) throw DomainError("gauss_legendre: need b > a");
    NodesWeights r;
    r.nodes.resize(m);
    r.weights.resize(m);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < m; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= m; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (m == 1) p0 = 1.0;
            dp = m * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // recompute derivative at the converged node
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= m; ++k) {
            double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = m * (x * p1 - p0) / (x * x - 1.0);
        // ascending order
        r.nodes[m - 1 - i] = mid + half * x;
        r.weights[m - 1 - i] = half * 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
}

namespace {

namespace mp = boost::multiprecision;

// Chebyshev algorithm: recurrence coefficients of the monic orthogonal
// polynomials for y^(-H-1/2) on [0, 1] from its moments 1/(k+1/2-H).
template <unsigned Digits>
bool recurrence_from_moments(int m, double H, std::vector<double>& alpha, std::vector<double>& beta) {
    using R = mp::number<mp::mpfr_float_backend<Digits>, mp::et_off>;
    const int nm = 2 * m;
    R h = R(1) / 2 - R(H);
    std::vector<R> mu(nm);
    for (int k = 0; k < nm; ++k) mu[k] = R(1) / (R(k) + h);
    std::vector<R> a(m), b(m);
    std::vector<R> sig_prev(nm, R(0)), sig(mu), sig_next(nm, R(0));
    a[0] = mu[1] / mu[0];
    b[0] = mu[0];
    for (int k = 1; k < m; ++k) {
        for (int l = k; l < nm - k; ++l)
            sig_next[l] = sig[l + 1] - a[k - 1] * sig[l] - b[k - 1] * sig_prev[l];
        if (!(sig_next[k] > 0)) return false;
        a[k] = sig_next[k + 1] / sig_next[k] - sig[k] / sig[k - 1];
        b[k] = sig_next[k] / sig[k - 1];
        sig_prev.swap(sig);
        sig.swap(sig_next);
    }
    alpha.resize(m);
    beta.resize(m);
    for (int k = 0; k < m; ++k) {
        alpha[k] = static_cast<double>(a[k]);
        beta[k] = static_cast<double>(b[k]);
        if (!(beta[k] > 0.0)) return false;
    }
    return true;
}

bool recurrence_dispatch(int m, double H, unsigned digits, std::vector<double>& alpha, std::vector<double>& beta) {
    if (digits <= 60) return recurrence_from_moments<60>(m, H, alpha, beta);
    if (digits <= 100) return recurrence_from_moments<100>(m, H, alpha, beta);
    if (digits <= 140) return recurrence_from_moments<140>(m, H, alpha, beta);
    if (digits <= 200) return recurrence_from_moments<200>(m, H, alpha, beta);
    return recurrence_from_moments<300>(m, H, alpha, beta);
}

// Golub-Welsch on the Jacobi matrix.
bool jacobi_to_rule(const std::vector<double>& alpha, const std::vector<double>& beta, NodesWeights& out) {
    const int m = int(alpha.size());
    Eigen::VectorXd diag(m), sub(std::max(m - 1, 0));
    for (int k = 0; k < m; ++k) diag[k] = alpha[k];
    for (int k = 1; k < m; ++k) sub[k - 1] = std::sqrt(beta[k]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success) return false;
    out.nodes.resize(m);
    out.weights.resize(m);
    for (int k = 0; k < m; ++k) {
        double v0 = es.eigenvectors()(0, k);
        out.nodes[k] = es.eigenvalues()[k];
        out.weights[k] = beta[0] * v0 * v0;
        if (!(out.weights[k] > 0.0) || !(out.nodes[k] > 0.0) || !(out.nodes[k] < 1.0)) return false;
    }
    return true;
}

}  // namespace

NodesWeights gauss_singular(int m, double a, double H) {
    if (m < 1 || m > 32) throw DomainError("gauss_singular: level must be in [1, 32]");
    if (!(a > 0.0)) throw DomainError("gauss_singular: right endpoint must be positive");
    if (!(H > -0.5 && H <= 0.5)) throw DomainError("gauss_singular: H must lie in (-1/2, 1/2]");
    if (H == 0.5) return gauss_legendre(m, 0.0, a);

    unsigned digits = 8 + 4 * unsigned(m);
    NodesWeights unit;
    bool ok = false;
    for (int attempt = 0; attempt < 2 && !ok; ++attempt, digits *= 2) {
        std::vector<double> alpha, beta;
        ok = recurrence_dispatch(m, H, digits, alpha, beta) && jacobi_to_rule(alpha, beta, unit);
    }
    if (!ok) throw ConvergenceError("gauss_singular: nonpositive weights after precision retry");

    const double scale = KernelSpec(H, 1.0).c_H() * std::pow(a, 0.5 - H);
    for (int k = 0; k < m; ++k) {
        unit.nodes[k] *= a;
        unit.weights[k] *= scale;
    }
    return unit;
}

int round_positive(double v) { return std::max(1, int(std::floor(v + 0.5))); }

PanelPartition gg_partition(double H, double T, int N, const GGParams& p) {
    if (N < 1) throw DomainError("geometric_rule: N must be at least 1");
    if (!(p.alpha > 0.0 && p.beta > 0.0 && p.a > 0.0 && p.b > 0.0))
        throw DomainError("geometric_rule: parameters must be positive");
    (void)T;
    PanelPartition part;
    const double h = 0.5 + H;
    part.m = round_positive(p.beta * std::sqrt(h * N));
    part.n = round_positive(std::sqrt(N / h) / p.beta);
    double xin = p.b * std::exp(p.alpha * std::sqrt(double(N)) / std::sqrt(h));
    if (!(p.a < xin)) throw ConstructionError("geometric_rule: a >= xi_n, degenerate panel geometry");
    part.xi.resize(part.n + 1);
    part.xi[0] = 0.0;
    for (int i = 1; i <= part.n; ++i) part.xi[i] = p.a * std::pow(xin / p.a, double(i) / part.n);
    part.xi[part.n] = xin;
    return part;
}

PanelPartition ngg_partition(double H, double T, int N, const NGGParams& p) {
    if (N < 1) throw DomainError("non_geometric_rule: N must be at least 1");
    if (!(p.c > 1.0) || !(p.beta > 0.0) || !(p.a > 0.0))
        throw DomainError("non_geometric_rule: need c > 1, beta > 0, a > 0");
    (void)T;
    PanelPartition part;
    const double h = 0.5 + H;
    part.m = round_positive(p.beta * std::sqrt(h * N));
    part.n = round_positive(std::sqrt(N / h) / p.beta);
    part.xi.resize(part.n + 1);
    part.xi[0] = 0.0;
    part.xi[1] = p.a;
    for (int i = 1; i < part.n; ++i) {
        double e = std::pow(part.xi[i], h / (2.0 * part.m));
        if (!(e < p.c))
            throw ConstructionError("non_geometric_rule: xi_" + std::to_string(i) + "^((1/2+H)/(2m)) >= c", i);
        double r = (p.c + e) / (p.c - e);
        part.xi[i + 1] = r * r * part.xi[i];
    }
    return part;
}

QuadratureRule rule_from_partition(double H, const PanelPartition& part) {
    std::vector<double> x, w;
    NodesWeights first = gauss_singular(part.m, part.xi[1], H);
    x = first.nodes;
    w = first.weights;
    const double cH = KernelSpec(H, 1.0).c_H();
    for (int i = 1; i < part.n; ++i) {
        NodesWeights g = gauss_legendre(part.m, part.xi[i], part.xi[i + 1]);
        for (int j = 0; j < part.m; ++j) {
            x.push_back(g.nodes[j]);
            w.push_back(cH * g.weights[j] * std::pow(g.nodes[j], -H - 0.5));
        }
    }
    return QuadratureRule::from_unsorted(std::move(x), std::move(w));
}

namespace {
// K = 1 is a single exponential with rate 0; every rule family collapses to it.
QuadratureRule constant_kernel_rule() { return QuadratureRule({0.0}, {1.0}); }
}  // namespace

QuadratureRule geometric_rule(double H, double T, int N, const GGParams& p) {
    KernelSpec spec(H, T);
    if (spec.is_constant()) return constant_kernel_rule();
    return rule_from_partition(H, gg_partition(H, T, N, p));
}

QuadratureRule geometric_rule(double H, double T, int N) { return geometric_rule(H, T, N, GGParams::defaults(T)); }

QuadratureRule non_geometric_rule(double H, double T, int N, const NGGParams& p) {
    KernelSpec spec(H, T);
    if (spec.is_constant()) return constant_kernel_rule();
    return rule_from_partition(H, ngg_partition(H, T, N, p));
}

QuadratureRule non_geometric_rule(double H, double T, int N) {
    return non_geometric_rule(H, T, N, NGGParams::defaults(T));
}

namespace {

using Field = std::function<double(double, double)>;

// One Dormand-Prince 5(4) step for y' = f(x, y). Returns false if any stage
// is non-finite (the caller treats that as a rejected step).
bool dopri_step(const Field& f, double x, double y, double h, double& y5, double& err) {
    double k1 = f(x, y);
    double k2 = f(x + h / 5.0, y + h * (1.0 / 5.0) * k1);
    double k3 = f(x + 3.0 * h / 10.0, y + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
    double k4 = f(x + 4.0 * h / 5.0, y + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3));
    double k5 = f(x + 8.0 * h / 9.0, y + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 +
                                              64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4));
    double k6 = f(x + h, y + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 + 46732.0 / 5247.0 * k3 +
                                  49.0 / 176.0 * k4 - 5103.0 / 18656.0 * k5));
    y5 = y + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4 - 2187.0 / 6784.0 * k5 +
                  11.0 / 84.0 * k6);
    double k7 = f(x + h, y5);
    double y4 = y + h * (5179.0 / 57600.0 * k1 + 7571.0 / 16695.0 * k3 + 393.0 / 640.0 * k4 -
                         92097.0 / 339200.0 * k5 + 187.0 / 2100.0 * k6 + 1.0 / 40.0 * k7);
    err = std::abs(y5 - y4);
    return std::isfinite(y5) && std::isfinite(err) && std::isfinite(k7);
}

struct EtaField {
    double c, beta;
    double E(double eta) const { return std::exp(eta / (2.0 * beta * beta)); }
    double rate(double eta) const {
        double e = E(eta);
        if (!(e < c)) return std::numeric_limits<double>::quiet_NaN();
        return 2.0 * std::log((c + e) / (c - e));
    }
    double eta_star() const { return 2.0 * beta * beta * std::log(c); }
};

constexpr double kEtaTol = 1e-13;
// Switch from eta(t) to t(eta) once the rate is this large.
constexpr double kSwitchRate = 8.0;

struct EtaResult {
    double eta;
    double t;          // time reached
    bool exploded;     // boundary reached before t_end
};

// Adaptive integration of y' = f(x, y) from x0 to x1, stopping early when
// stop(x, y) turns true inside an accepted step; the crossing is then refined
// by bisection on the step length.
struct Stop {
    std::function<double(double, double)> level;  // sign change marks the event
};

bool integrate(const Field& f, double& x, double& y, double x1, const Stop* stop) {
    double h = (x1 - x) * 1e-3;
    int guard = 0;
    while (x < x1) {
        if (++guard > 1'000'000) throw ConvergenceError("eta_ode: step budget exhausted");
        h = std::min(h, x1 - x);
        double yn, err;
        bool ok = dopri_step(f, x, y, h, yn, err);
        double scale = kEtaTol * std::max(1.0, std::abs(yn));
        if (!ok || err > scale) {
            h *= ok ? std::max(0.2, 0.9 * std::pow(scale / err, 0.2)) : 0.25;
            if (h < 1e-300 || h <= 1e-15 * std::abs(x)) return false;
            continue;
        }
        if (stop && stop->level(x + h, yn) >= 0.0) {
            // refine the event inside [x, x + h]
            double lo = 0.0, hi = h;
            for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, std::abs(x)); ++it) {
                double mid = 0.5 * (lo + hi), ym, e2;
                dopri_step(f, x, y, mid, ym, e2);
                if (stop->level(x + mid, ym) >= 0.0) hi = mid; else lo = mid;
            }
            double yh;
            double e2;
            dopri_step(f, x, y, hi, yh, e2);
            x += hi;
            y = yh;
            return true;
        }
        x += h;
        y = yn;
        double fac = err > 0.0 ? 0.9 * std::pow(scale / err, 0.2) : 5.0;
        h *= std::clamp(fac, 0.2, 5.0);
    }
    return true;
}

EtaResult solve_eta(double c, double beta, double t_end) {
    if (!(c > 1.0)) throw DomainError("eta_ode: need c > 1");
    if (!(beta > 0.0)) throw DomainError("eta_ode: need beta > 0");
    EtaField fld{c, beta};
    const double es = fld.eta_star();

    // phase 1: eta as a function of t, away from the boundary
    double t = 0.0, eta = 0.0;
    Field f1 = [&](double, double y) { return fld.rate(y); };
    Stop near{[&](double, double y) {
        double r = fld.rate(y);
        return std::isfinite(r) ? r - kSwitchRate : 1.0;
    }};
    bool switched = false;
    if (fld.rate(0.0) >= kSwitchRate) {
        switched = true;
    } else {
        integrate(f1, t, eta, t_end, &near);
        switched = t < t_end;
    }
    if (!switched) return {eta, t, false};

    // phase 2: t as a function of eta up to the singular boundary eta*
    Field f2 = [&](double y, double) {
        if (y >= es) return 0.0;
        double r = fld.rate(y);
        return std::isfinite(r) ? 1.0 / r : 0.0;
    };
    Stop reach{[&](double, double tt) { return tt - t_end; }};
    double e = eta, tt = t;
    integrate(f2, e, tt, es, &reach);
    if (tt >= t_end * (1.0 - 1e-15) && e < es) return {e, tt, false};
    return {es, tt, true};
}

}  // namespace

double eta_ode(double c, double beta, double t_end) {
    if (!(t_end > 0.0)) throw DomainError("eta_ode: t_end must be positive");
    EtaResult r = solve_eta(c, beta, t_end);
    if (r.exploded && r.t < t_end)
        throw ExplosionError("eta_ode: solution reaches the boundary exp(eta/(2 beta^2)) = c at T0 = " +
                                 std::to_string(r.t) + " before t_end",
                             r.t, r.eta);
    return r.eta;
}

double eta_explosion_time(double c, double beta) {
    return solve_eta(c, beta, std::numeric_limits<double>::max()).t;
}

double ae_partition_width(double H, double T, int N) { return config::ae_pi(H, T, N); }

QuadratureRule ae_rule(double H, double T, int N) {
    KernelSpec spec(H, T);
    if (N < 1) throw DomainError("ae_rule: N must be at least 1");
    if (spec.is_constant()) return constant_kernel_rule();
    const double pi = ae_partition_width(H, T, N), cH = spec.c_H();
    const double p0 = 0.5 - H, p1 = 1.5 - H;
    std::vector<double> x(N), w(N);
    for (int i = 1; i <= N; ++i) {
        double lo = (i - 1) * pi, hi = i * pi;
        double mass = cH * (std::pow(hi, p0) - std::pow(lo, p0)) / p0;
        double first = cH * (std::pow(hi, p1) - std::pow(lo, p1)) / p1;
        w[i - 1] = mass;
        x[i - 1] = first / mass;
    }
    return QuadratureRule(std::move(x), std::move(w));
}

}  // namespace roughmarkov
