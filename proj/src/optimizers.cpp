#include "roughmarkov/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "roughmarkov/config.hpp"
#include "roughmarkov/errors.hpp"
#include "roughmarkov/math_core.hpp"
#include "roughmarkov/quadrature.hpp"

namespace roughmarkov {

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                             double step, int max_evals, double ftol) {
    const std::size_t n = x0.size();
    int evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::max();
    };
    std::vector<double> best = x0;
    double fbest = eval(best);
    if (n == 0) return {best, fbest, evals};

    for (int restart = 0; restart < 20 && evals < max_evals; ++restart) {
        std::vector<std::vector<double>> s(n + 1, best);
        std::vector<double> fs(n + 1);
        fs[0] = fbest;
        for (std::size_t i = 0; i < n; ++i) {
            s[i + 1][i] += step;
            fs[i + 1] = eval(s[i + 1]);
        }
        std::vector<std::size_t> idx(n + 1);
        while (evals < max_evals) {
            std::iota(idx.begin(), idx.end(), 0);
            std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
            std::size_t lo = idx[0], hi = idx[n], nh = idx[n - 1];
            double spread = fs[hi] - fs[lo];
            double size = 0.0;
            for (std::size_t i = 0; i <= n; ++i)
                for (std::size_t k = 0; k < n; ++k) size = std::max(size, std::abs(s[i][k] - s[lo][k]));
            if (spread <= ftol * (std::abs(fs[lo]) + 1e-300) && size < 1e-6) break;
            if (size < 1e-12) break;

            std::vector<double> c(n, 0.0);
            for (std::size_t i = 0; i <= n; ++i)
                if (i != hi)
                    for (std::size_t k = 0; k < n; ++k) c[k] += s[i][k] / double(n);
            auto along = [&](double t) {
                std::vector<double> p(n);
                for (std::size_t k = 0; k < n; ++k) p[k] = c[k] + t * (s[hi][k] - c[k]);
                return p;
            };
            auto xr = along(-1.0);
            double fr = eval(xr);
            if (fr < fs[lo]) {
                auto xe = along(-2.0);
                double fe = eval(xe);
                if (fe < fr) {
                    s[hi] = xe;
                    fs[hi] = fe;
                } else {
                    s[hi] = xr;
                    fs[hi] = fr;
                }
            } else if (fr < fs[nh]) {
                s[hi] = xr;
                fs[hi] = fr;
            } else {
                bool outside = fr < fs[hi];
                auto xc = along(outside ? -0.5 : 0.5);
                double fc = eval(xc);
                if (fc < (outside ? fr : fs[hi])) {
                    s[hi] = xc;
                    fs[hi] = fc;
                } else {
                    for (std::size_t i = 0; i <= n; ++i) {
                        if (i == lo) continue;
                        for (std::size_t k = 0; k < n; ++k) s[i][k] = s[lo][k] + 0.5 * (s[i][k] - s[lo][k]);
                        fs[i] = eval(s[i]);
                    }
                }
            }
        }
        std::size_t lo = std::min_element(fs.begin(), fs.end()) - fs.begin();
        double gain = fbest - fs[lo];
        if (fs[lo] < fbest) {
            best = s[lo];
            fbest = fs[lo];
        }
        if (!(gain > ftol * std::abs(fbest) * 10.0)) break;
    }
    return {best, fbest, evals};
}

std::vector<double> nonneg_quadratic(const std::vector<double>& G, const std::vector<double>& b, int n) {
    // Lawson-Hanson active set written for the normal-equation form.
    std::vector<double> w(n, 0.0);
    std::vector<bool> passive(n, false);
    auto grad = [&](int j) {
        double g = b[j];
        for (int k = 0; k < n; ++k) g -= G[j * n + k] * w[k];
        return g;
    };
    auto solve_passive = [&](std::vector<double>& z) {
        std::vector<int> P;
        for (int j = 0; j < n; ++j)
            if (passive[j]) P.push_back(j);
        Eigen::MatrixXd A(P.size(), P.size());
        Eigen::VectorXd r(P.size());
        for (std::size_t i = 0; i < P.size(); ++i) {
            r[i] = b[P[i]];
            for (std::size_t k = 0; k < P.size(); ++k) A(i, k) = G[P[i] * n + P[k]];
        }
        Eigen::VectorXd sol = A.ldlt().solve(r);
        z.assign(n, 0.0);
        for (std::size_t i = 0; i < P.size(); ++i) z[P[i]] = sol[i];
    };
    double scale = 0.0;
    for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(b[j]));
    const double tol = 1e-14 * std::max(scale, 1e-300);
    for (int outer = 0; outer < 3 * n + 10; ++outer) {
        int jmax = -1;
        double gmax = tol;
        for (int j = 0; j < n; ++j)
            if (!passive[j]) {
                double g = grad(j);
                if (g > gmax) {
                    gmax = g;
                    jmax = j;
                }
            }
        if (jmax < 0) break;
        passive[jmax] = true;
        for (int inner = 0; inner < 3 * n + 10; ++inner) {
            std::vector<double> z;
            solve_passive(z);
            bool feasible = true;
            for (int j = 0; j < n; ++j)
                if (passive[j] && !(z[j] > 0.0)) feasible = false;
            if (feasible) {
                w = z;
                break;
            }
            double alpha = 1.0;
            for (int j = 0; j < n; ++j)
                if (passive[j] && !(z[j] > 0.0)) alpha = std::min(alpha, w[j] / (w[j] - z[j]));
            for (int j = 0; j < n; ++j) {
                if (!passive[j]) continue;
                w[j] += alpha * (z[j] - w[j]);
                if (w[j] <= 1e-300 * scale || !std::isfinite(w[j])) {
                    w[j] = 0.0;
                    passive[j] = false;
                }
            }
        }
    }
    return w;
}

namespace {

double phi1(double x, double d) { return decay_integral(x, d); }

// <K, e^{-x .}> on [0, T]
double kernel_moment(double H, double T, double x, double gH) {
    if (x == 0.0) return std::pow(T, H + 0.5) / ((H + 0.5) * gH);
    return std::pow(x, -H - 0.5) * lower_incomplete_gamma(H + 0.5, x * T) / gH;
}

}  // namespace

double l2_weights(double H, double T, const std::vector<double>& nodes, std::vector<double>& weights) {
    const double gH = gamma(H + 0.5);
    // coincident nodes make the Gram matrix singular; solve on the distinct set
    std::vector<double> u;
    std::vector<int> map(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        int found = -1;
        for (std::size_t k = 0; k < u.size(); ++k)
            if (std::abs(u[k] - nodes[i]) <= 1e-12 * std::max(u[k], nodes[i])) found = int(k);
        if (found < 0) {
            found = int(u.size());
            u.push_back(nodes[i]);
        }
        map[i] = found;
    }
    const int n = int(u.size());
    std::vector<double> G(n * n), b(n);
    for (int i = 0; i < n; ++i) {
        b[i] = kernel_moment(H, T, u[i], gH);
        for (int j = 0; j < n; ++j) G[i * n + j] = phi1(u[i] + u[j], T);
    }
    std::vector<double> w = nonneg_quadratic(G, b, n);
    double J = 0.0;
    for (int i = 0; i < n; ++i) {
        J -= 2.0 * b[i] * w[i];
        for (int j = 0; j < n; ++j) J += w[i] * G[i * n + j] * w[j];
    }
    weights.assign(nodes.size(), 0.0);
    std::vector<bool> used(n, false);
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (!used[map[i]]) {
            weights[i] = w[map[i]];
            used[map[i]] = true;
        }
    return J;
}

namespace {

// N log-spaced starting nodes spanning the GG rule's range, capped at L.
std::vector<double> initial_nodes(double H, double T, int N, double L) {
    QuadratureRule gg = geometric_rule(H, T, N);
    double lo = 0.0, hi = 0.0;
    for (double x : gg.nodes)
        if (x > 0.0) {
            if (lo == 0.0) lo = x;
            hi = x;
        }
    if (lo == 0.0) lo = hi = 1.0 / T;
    hi = std::min(hi, L);
    lo = std::min(lo, hi / 10.0);
    if (N == 1) return {std::sqrt(lo * hi)};
    std::vector<double> x(N);
    for (int i = 0; i < N; ++i) x[i] = lo * std::pow(hi / lo, double(i) / (N - 1));
    return x;
}

void telemetry(const OptBudget& budget, const char* what, int N, double L, double err, int evals) {
    if (!budget.verbose) return;
    std::cerr << "{\"optimizer\":\"" << what << "\",\"N\":" << N << ",\"L\":" << L << ",\"error\":" << err
              << ",\"evals\":" << evals << "}\n";
}

struct L2Run {
    std::vector<double> nodes;
    double J;
};

L2Run run_l2(double H, double T, int N, double L, const std::vector<double>& start, int max_evals) {
    const double logL = std::log(L);
    auto to_nodes = [&](const std::vector<double>& y) {
        std::vector<double> x(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) x[i] = std::exp(std::min(y[i], logL));
        return x;
    };
    auto obj = [&](const std::vector<double>& y) {
        std::vector<double> w;
        return l2_weights(H, T, to_nodes(y), w);
    };
    std::vector<double> y0(N);
    for (int i = 0; i < N; ++i) y0[i] = std::log(std::max(start[i], 1e-300));
    auto r = nelder_mead(obj, y0, 0.5, max_evals, 1e-13);
    return {to_nodes(r.x), r.f};
}

BoundedOptResult finish_l2(double H, double T, double L, const std::vector<double>& nodes) {
    std::vector<double> w;
    double J = l2_weights(H, T, nodes, w);
    std::vector<double> xs, ws;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (w[i] > 0.0) {
            xs.push_back(nodes[i]);
            ws.push_back(w[i]);
        }
    BoundedOptResult res;
    res.rule = QuadratureRule::from_unsorted(xs, ws);
    res.bound = L;
    if (H > 0.0) {
        double nk = norm_l2(KernelSpec(H, T));
        res.error = std::sqrt(std::max(0.0, nk * nk + J));
    } else {
        res.error = J;
    }
    return res;
}

// Shared by opt_l2 and bl2 (which also accepts H <= 0 for finite L).
L2Run l2_search(double H, double T, int N, double L, const OptBudget& budget, const std::vector<double>* init) {
    std::vector<double> start = init ? *init : initial_nodes(H, T, N, L);
    if (int(start.size()) != N) throw DomainError("opt_l2: initial node count does not match N");
    L2Run best = run_l2(H, T, N, L, start, budget.max_evals);
    std::mt19937_64 gen(budget.seed);
    std::normal_distribution<double> jitter(0.0, 0.5);
    for (int r = 0; r < budget.restarts; ++r) {
        std::vector<double> s = best.nodes;
        for (double& x : s) x = std::min(L, x * std::exp(jitter(gen)));
        L2Run cand = run_l2(H, T, N, L, s, budget.max_evals);
        if (cand.J < best.J) best = cand;
    }
    return best;
}

}  // namespace

BoundedOptResult opt_l2(double H, double T, int N, double L, const OptBudget& budget,
                        const std::vector<double>* init) {
    if (!(H > 0.0)) throw DomainError("opt_l2: the L2 norm of K is infinite for H <= 0");
    KernelSpec spec(H, T);
    if (N < 1) throw DomainError("opt_l2: N must be at least 1");
    if (!(L > 0.0)) throw DomainError("opt_l2: node bound must be positive");
    if (spec.is_constant()) return {QuadratureRule({0.0}, {1.0}), 0.0, L};
    L2Run r = l2_search(H, T, N, L, budget, init);
    BoundedOptResult res = finish_l2(H, T, L, r.nodes);
    telemetry(budget, "opt_l2", N, L, res.error, 0);
    return res;
}

BoundedOptResult opt_l1(double H, double T, int N, const OptBudget& budget) {
    KernelSpec spec(H, T);
    if (N < 1) throw DomainError("opt_l1: N must be at least 1");
    constexpr double tol = 1e-8;
    auto unpack = [&](const std::vector<double>& p) {
        std::vector<double> x(N), w(N);
        for (int i = 0; i < N; ++i) {
            x[i] = std::exp(p[i]);
            w[i] = std::exp(p[N + i]);
        }
        return QuadratureRule::from_unsorted(x, w);
    };
    auto obj = [&](const std::vector<double>& p) {
        try {
            return l1_error_intersections(spec, unpack(p), tol).relative_l1;
        } catch (const DomainError&) {  // exp overflow in a wild simplex vertex
            return std::numeric_limits<double>::max();
        } catch (const ConvergenceError&) {
            return std::numeric_limits<double>::max();
        }
    };
    auto pack = [&](std::vector<double> x, std::vector<double> w) {
        double wmax = *std::max_element(w.begin(), w.end());
        std::vector<double> p(2 * N);
        for (int i = 0; i < N; ++i) {
            p[i] = std::log(std::max(x[i], 1e-8 / T));
            p[N + i] = std::log(std::max(w[i], 1e-6 * std::max(wmax, 1e-300)));
        }
        return p;
    };

    std::vector<std::vector<double>> starts;
    {
        std::vector<double> x = initial_nodes(H, T, N, std::numeric_limits<double>::infinity()), w;
        l2_weights(H, T, x, w);
        starts.push_back(pack(x, w));
    }
    QuadratureRule gg = geometric_rule(H, T, N);
    if (int(gg.size()) == N) starts.push_back(pack(gg.nodes, gg.weights));
    if (!spec.is_constant()) {
        QuadratureRule ae = ae_rule(H, T, N);
        starts.push_back(pack(ae.nodes, ae.weights));
    }

    NelderMeadResult best{{}, std::numeric_limits<double>::max(), 0};
    int evals = 0;
    for (const auto& s : starts) {
        auto r = nelder_mead(obj, s, 0.3, budget.max_evals, 1e-12);
        evals += r.evals;
        if (r.f < best.f) best = r;
    }
    std::mt19937_64 gen(budget.seed);
    std::normal_distribution<double> jitter(0.0, 0.3);
    for (int r = 0; r < budget.restarts; ++r) {
        std::vector<double> s = best.x;
        for (double& v : s) v += jitter(gen);
        auto c = nelder_mead(obj, s, 0.3, budget.max_evals, 1e-12);
        evals += c.evals;
        if (c.f < best.f) best = c;
    }
    BoundedOptResult res;
    res.rule = unpack(best.x);
    res.error = best.f;
    telemetry(budget, "opt_l1", N, res.bound, res.error, evals);
    return res;
}

QuadratureRule bl2(double H, double T, int N, double q, double epsilon, const OptBudget& budget) {
    KernelSpec spec(H, T);
    if (N < 1) throw DomainError("bl2: N must be at least 1");
    if (!(q >= 1.05 && q <= 1.15)) throw DomainError("bl2: growth factor q must lie in [1.05, 1.15]");
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw DomainError("bl2: epsilon must lie in [0, 1)");
    if (spec.is_constant()) return QuadratureRule({0.0}, {1.0});
    if (N == 1) {
        if (!(H > 0.0)) throw DomainError("bl2: N = 1 needs the unbounded L2 problem, which requires H > 0");
        return opt_l2(H, T, 1, std::numeric_limits<double>::infinity(), budget).rule;
    }

    OptBudget warm = budget;
    warm.restarts = 0;
    double L = 1.0;
    L2Run r1 = l2_search(H, T, N - 1, L, budget, nullptr);
    L2Run r2 = l2_search(H, T, N, L, budget, nullptr);
    // Objectives are compared as J = ||K^N||^2 - 2<K,K^N>, which is a shift of the
    // squared error; the test is done on the errors themselves when those exist.
    const double nk2 = H > 0.0 ? std::pow(norm_l2(spec), 2) : 0.0;
    auto err = [&](double J) { return H > 0.0 ? std::sqrt(std::max(0.0, nk2 + J)) : J; };
    auto no_gain = [&](double J1, double J2) {
        double e1 = err(J1), e2 = err(J2);
        double floor = config::kBl2NoiseFloor * std::abs(e1);
        return e2 > (1.0 - epsilon) * e1 - floor;
    };
    for (int it = 0; no_gain(r1.J, r2.J); ++it) {
        if (it >= 10000) throw ConvergenceError("bl2: node bound search did not terminate");
        L *= q;
        // warm starts from the previous bound, cross-seeded in both directions
        std::vector<double> s1 = r1.nodes, s2 = r2.nodes;
        L2Run n1 = l2_search(H, T, N - 1, L, warm, &s1);
        L2Run n2 = l2_search(H, T, N, L, warm, &s2);
        std::vector<double> grow = n1.nodes;
        grow.push_back(L);
        L2Run g2 = l2_search(H, T, N, L, warm, &grow);
        if (g2.J < n2.J) n2 = g2;
        // warm starts can sit on a merged pair of nodes pinned at the old bound; a cold start cannot
        L2Run c2 = l2_search(H, T, N, L, warm, nullptr);
        if (c2.J < n2.J) n2 = c2;
        std::vector<double> w;
        l2_weights(H, T, n2.nodes, w);
        std::size_t drop = std::min_element(w.begin(), w.end()) - w.begin();
        std::vector<double> shrink = n2.nodes;
        shrink.erase(shrink.begin() + drop);
        L2Run d1 = l2_search(H, T, N - 1, L, warm, &shrink);
        if (d1.J < n1.J) n1 = d1;
        r1 = n1;
        r2 = n2;
        telemetry(budget, "bl2", N, L, err(r2.J), it);
        if (budget.verbose) std::cerr << "{\"bl2_previous\":" << err(r1.J) << "}\n";
    }
    return finish_l2(H, T, L, r2.nodes).rule;
}

}  // namespace roughmarkov
