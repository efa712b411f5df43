#include "roughmarkov/riccati.hpp"

#include <cmath>
#include <string>

#include "roughmarkov/errors.hpp"

namespace roughmarkov {

void HestonParams::validate() const {
    if (!(S0 > 0.0) || !(V0 > 0.0)) throw DomainError("HestonParams: S0 and V0 must be positive");
    if (!(theta >= 0.0) || !(lam >= 0.0) || !(nu >= 0.0))
        throw DomainError("HestonParams: theta, lambda, nu must be nonnegative");
    if (!(std::abs(rho) <= 1.0)) throw DomainError("HestonParams: |rho| must not exceed 1");
}

HestonParams preset_sec52() { return HestonParams{1.0, 0.02, 0.02, 0.3, 0.3, -0.7}; }
HestonParams preset_sec54() { return HestonParams{1.0, 0.02, 0.3 * 0.02, 0.3, 0.3, -0.7}; }

HestonParams preset(const std::string& name) {
    if (name == "sec52") return preset_sec52();
    if (name == "sec54") return preset_sec54();
    throw DomainError("unknown preset: " + name);
}

namespace {

constexpr double kBlowUp = 1e150;

void check_finite(cplx v, const char* who) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()) || std::abs(v) > kBlowUp)
        throw DivergenceError(std::string(who) + ": Riccati solution diverged (moment explosion)");
}

std::vector<double> uniform_grid(double T, int n) {
    std::vector<double> g(n + 1);
    for (int k = 0; k <= n; ++k) g[k] = T * k / n;
    return g;
}

// Solves x = d + c F(z, x), the corrector equation iterated to convergence. F is quadratic in x, so
// this is a root pick: the branch that reduces to the linear solution as nu -> 0. Solving exactly
// instead of one explicit correction keeps large |Im z| stable on coarse grids.
cplx implicit_step(cplx c, cplx d, cplx z, const HestonParams& p) {
    const cplx f0 = 0.5 * (z * z - z), b = p.rho * p.nu * z - p.lam;
    const cplx lin = 1.0 - c * b, rhs = c * f0 + d;
    if (p.nu == 0.0) return rhs / lin;
    const cplx d2 = lin * lin - 2.0 * c * p.nu * p.nu * rhs;
    // for real z a real solution stops existing exactly when the step passes the blow-up time
    if (z.imag() == 0.0 && d2.real() < 0.0)
        throw DivergenceError("Riccati solution diverged (moment explosion) at real argument " + std::to_string(z.real()));
    cplx disc = std::sqrt(d2);
    if ((std::conj(lin) * disc).real() < 0.0) disc = -disc;
    return 2.0 * rhs / (lin + disc);
}

}  // namespace

RiccatiSolution adams_fractional_riccati(const KernelSpec& spec, const HestonParams& p, cplx z, double T,
                                         int n_steps) {
    if (n_steps < 8) throw DomainError("adams_fractional_riccati: need at least 8 steps");
    if (!(T > 0.0)) throw DomainError("adams_fractional_riccati: T must be positive");
    const int n = n_steps;
    const double a = spec.H + 0.5, dt = T / n;
    const double ca = std::pow(dt, a) / gamma(a + 2.0);
    // product-trapezoid weights depend on m = k - j only
    std::vector<double> A(n), pw(n + 2), pw1(n + 2);
    for (int m = 0; m <= n + 1; ++m) {
        pw[m] = std::pow(double(m), a);
        pw1[m] = std::pow(double(m), a + 1.0);
    }
    for (int m = 0; m < n; ++m) A[m] = pw1[m + 2] + pw1[m] - 2.0 * pw1[m + 1];
    RiccatiSolution sol{z, uniform_grid(T, n), std::vector<cplx>(n + 1, 0.0)};
    std::vector<cplx> Fv(n + 1);
    Fv[0] = F(z, 0.0, p);
    for (int k = 0; k < n; ++k) {
        // j = 0 weight is special
        double a0 = pw1[k] - (double(k) - a) * pw[k + 1];
        cplx hist = a0 * Fv[0];
        for (int j = 1; j <= k; ++j) hist += A[k - j] * Fv[j];
        cplx next = implicit_step(ca, ca * hist, z, p);
        check_finite(next, "adams_fractional_riccati");
        sol.psi[k + 1] = next;
        Fv[k + 1] = F(z, next, p);
    }
    return sol;
}

RiccatiSolution markov_riccati(const QuadratureRule& rule, const HestonParams& p, cplx z, double T, int n_steps) {
    if (n_steps < 8) throw DomainError("markov_riccati: need at least 8 steps");
    if (!(T > 0.0)) throw DomainError("markov_riccati: T must be positive");
    const std::size_t N = rule.size();
    const double dt = T / n_steps;
    std::vector<double> decay(N), gain(N);
    for (std::size_t i = 0; i < N; ++i) {
        double x = rule.nodes[i];
        decay[i] = std::exp(-x * dt);
        gain[i] = decay_integral(x, dt);
    }
    RiccatiSolution sol{z, uniform_grid(T, n_steps), std::vector<cplx>(n_steps + 1, 0.0)};
    double wgain = 0.0;
    for (std::size_t i = 0; i < N; ++i) wgain += rule.weights[i] * gain[i];
    std::vector<cplx> comp(N, 0.0);
    cplx total = 0.0;
    for (int k = 0; k < n_steps; ++k) {
        cplx f0 = F(z, total, p);
        cplx carry = 0.0;
        for (std::size_t i = 0; i < N; ++i) carry += rule.weights[i] * decay[i] * comp[i];
        cplx next = implicit_step(0.5 * wgain, carry + 0.5 * wgain * f0, z, p);
        cplx fbar = 0.5 * (f0 + F(z, next, p));
        total = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            comp[i] = decay[i] * comp[i] + gain[i] * fbar;
            total += rule.weights[i] * comp[i];
        }
        check_finite(total, "markov_riccati");
        sol.psi[k + 1] = total;
    }
    return sol;
}

cplx log_char_fn(const CharFnRequest& req, cplx z) {
    const auto& p = req.params;
    const double T = req.T;
    RiccatiSolution sol;
    std::vector<double> g(req.n_steps + 1);
    const double dt = T / req.n_steps;
    if (const auto* spec = std::get_if<KernelSpec>(&req.model)) {
        sol = adams_fractional_riccati(*spec, p, z, T, req.n_steps);
        const double a = spec->H + 0.5, ga = gamma(a + 1.0);
        for (int k = 0; k <= req.n_steps; ++k) g[k] = p.V0 + p.theta * std::pow(k * dt, a) / ga;
    } else {
        const auto& rule = std::get<QuadratureRule>(req.model);
        sol = markov_riccati(rule, p, z, T, req.n_steps);
        for (int k = 0; k <= req.n_steps; ++k) {
            double t = k * dt, s = 0.0;
            for (std::size_t i = 0; i < rule.size(); ++i) {
                double x = rule.nodes[i];
                s += rule.weights[i] * decay_integral(x, t);
            }
            g[k] = p.V0 + p.theta * s;
        }
    }
    // integral of F(psi(s)) g(T - s) ds by the trapezoid rule
    const int n = req.n_steps;
    cplx acc = 0.5 * (F(z, sol.psi[0], p) * g[n] + F(z, sol.psi[n], p) * g[0]);
    for (int k = 1; k < n; ++k) acc += F(z, sol.psi[k], p) * g[n - k];
    return acc * dt;
}

cplx char_fn(const CharFnRequest& req, cplx z) { return std::exp(log_char_fn(req, z)); }

}  // namespace roughmarkov
