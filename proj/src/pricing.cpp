#include "roughmarkov/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <thread>

#include "roughmarkov/errors.hpp"

namespace roughmarkov {

bool moment_check(const HestonParams& p, double q) {
    if (q >= 0.0 && q <= 1.0) return true;
    if (p.nu == 0.0) return true;  // deterministic variance: every moment is finite
    double a = p.rho * p.nu * q - p.lam;
    return a < 0.0 && a * a - p.nu * p.nu * q * (q - 1.0) >= 0.0;
}

double default_damping(const HestonParams& p, Payoff::Kind kind) {
    if (kind == Payoff::Digital) return 0.5;
    return moment_check(p, 2.0) ? 2.0 : 1.5;
}

namespace {

constexpr double kPi = std::numbers::pi;

// Largest q (up to 50) with finite moments; the call aliasing margin depends on it.
double upper_moment(const HestonParams& p) {
    double q = 1.0;
    while (q < 50.0 && moment_check(p, q + 0.01)) q += 0.01;
    return q;
}

CharFnRequest at_maturity(const CharFnRequest& req, double T) {
    CharFnRequest r = req;
    r.T = T;
    if (auto* spec = std::get_if<KernelSpec>(&r.model)) *spec = KernelSpec(spec->H, T);
    return r;
}

void check_damping(const HestonParams& p, Payoff::Kind kind, double R) {
    if (kind == Payoff::Call && !(R > 1.0)) throw DomainError("call pricing needs damping R > 1");
    if (kind == Payoff::Digital && !(R > 0.0 && R < 1.0)) throw DomainError("digital pricing needs damping R in (0, 1)");
    if (!moment_check(p, R))
        throw DomainError("damping R = " + std::to_string(R) +
                          " violates the moment condition: E[S_T^R] is infinite for these parameters");
}

// payoff transform without the e^{iuk} e^{(1-R)k} (call) / e^{-Rk} (digital) factor
cplx transform_core(Payoff::Kind kind, cplx zeta, double S0) {
    const cplx i(0.0, 1.0);
    if (kind == Payoff::Call) return S0 / (i * zeta * (1.0 + i * zeta));
    return -1.0 / (i * zeta);
}

using LevelHook = std::function<bool(int level, const std::vector<double>& prices)>;

// Runs refinement levels until `hook` returns true or the level budget is spent.
// A numerical blow-up restarts the sequence at level 0 with more Riccati steps.
// Returns the number of levels computed.
int fourier_levels(const CharFnRequest& req, Payoff::Kind kind, const std::vector<double>& strikes, double R,
                   const std::function<double()>& trunc_abs, const FourierSettings& set, const LevelHook& hook) {
    const auto& p = req.params;
    p.validate();
    check_damping(p, kind, R);
    const std::size_t ns = strikes.size();
    std::vector<double> k(ns), scale(ns);
    double smax = 0.0;
    for (std::size_t j = 0; j < ns; ++j) {
        if (!(strikes[j] > 0.0)) throw DomainError("strikes must be positive");
        k[j] = std::log(strikes[j] / p.S0);
        scale[j] = kind == Payoff::Call ? std::exp((1.0 - R) * k[j]) : std::exp(-R * k[j]);
        smax = std::max(smax, scale[j]);
    }
    double h0 = set.h0;
    if (!(h0 > 0.0)) {
        double qmax = upper_moment(p);
        double margin = kind == Payoff::Call ? std::min(R - 1.0, qmax - R) : std::min(R, qmax - R);
        margin = std::max(margin, 0.05);
        double need = std::log(std::max(10.0, 100.0 * p.S0 * smax / trunc_abs()));
        double kspan = 0.0;
        for (double kk : k) kspan = std::max(kspan, std::abs(kk));
        // aliasing decays like exp(-margin * 2 pi / h): sized so level 1 meets the target, level 0 its square root
        h0 = std::min(4.0 * kPi * margin / need, kPi / (kspan + 1.0));
    }
    const cplx i(0.0, 1.0);
    const int threads = std::max(1, set.threads);
    constexpr int block = 64;
    int n0 = set.n_steps0;
    for (int level = 0; level < set.max_levels; ++level) {
        const double h = h0 / std::ldexp(1.0, level);
        CharFnRequest rl = req;
        rl.n_steps = n0 << level;
        std::vector<double> acc(ns, 0.0);
        const double trunc = trunc_abs();
        int quiet = 0;
        long j0 = 0;
        const long max_points = 4'000'000;
        bool done = false;
        std::vector<cplx> G(block);
        while (!done) {
            if (j0 >= max_points) throw AccuracyError("Fourier integrand did not decay within the u budget", 0.0, 1.0);
            std::vector<char> blew(threads, 0);
            auto work = [&](int t) {
                for (int b = t; b < block; b += threads) {
                    double u = (j0 + b) * h;
                    cplx zeta(u, R);
                    try {
                        G[b] = char_fn(rl, cplx(R, -u)) * transform_core(kind, zeta, p.S0);
                    } catch (const DivergenceError&) {
                        blew[t] = 1;
                    }
                }
            };
            if (threads == 1) {
                work(0);
            } else {
                std::vector<std::thread> pool;
                for (int t = 0; t < threads; ++t) pool.emplace_back(work, t);
                for (auto& th : pool) th.join();
            }
            if (std::find(blew.begin(), blew.end(), 1) != blew.end()) break;
            for (int b = 0; b < block && !done; ++b) {
                long jj = j0 + b;
                double u = jj * h, wgt = jj == 0 ? 0.5 * h : h;
                for (std::size_t s = 0; s < ns; ++s)
                    acc[s] += wgt * (G[b] * std::exp(i * u * k[s])).real() * scale[s];
                // tail beyond u bounded by |G(u)| times a decay length of u
                double tail = std::abs(G[b]) * smax * std::max(u, 1.0) / kPi;
                quiet = tail < 1e-2 * trunc ? quiet + 1 : 0;
                if (quiet >= 16 && u > 1.0) done = true;
            }
            j0 += block;
        }
        if (!done) {
            // moments are finite, so a blow-up is the explicit scheme going unstable at large u:
            // restart the whole level sequence on a finer time grid
            if (n0 >= (1 << 16)) throw DivergenceError("Riccati solver unstable on the Fourier grid even at fine steps");
            n0 *= 2;
            if (set.verbose) std::fprintf(stderr, "{\"restart\":true,\"n_steps0\":%d}\n", n0);
            level = -1;
            continue;
        }
        if (set.verbose)
            std::fprintf(stderr, "{\"level\":%d,\"h\":%.4g,\"u_max\":%.4g,\"n_steps\":%d}\n", level, h,
                         (j0 - 1) * h, rl.n_steps);
        std::vector<double> prices(ns);
        for (std::size_t s = 0; s < ns; ++s) prices[s] = acc[s] / kPi;
        if (hook(level, prices)) return level + 1;
    }
    return set.max_levels;
}

// Three-level error estimate from successive differences.
double richardson(double p0, double p1, double p2) {
    double d1 = std::abs(p1 - p0), d2 = std::abs(p2 - p1);
    if (d2 == 0.0) return 0.0;
    double r = d1 > 0.0 ? d2 / d1 : 0.9;
    r = std::clamp(r, 0.25, 0.9);
    return d2 * r / (1.0 - r) + d2 * 1e-3;
}

}  // namespace

BatchResult fourier_batch_fn(const CharFnRequest& req, Payoff::Kind kind, const std::vector<double>& strikes, double R,
                             const std::function<double(std::size_t, double)>& abs_tol, double trunc_abs,
                             const FourierSettings& set, bool throw_on_failure) {
    const std::size_t ns = strikes.size();
    std::vector<std::vector<double>> hist;
    BatchResult out;
    out.error_estimates.assign(ns, std::numeric_limits<double>::infinity());
    bool ok = false;
    // truncate against the tolerances implied by the latest prices; the caller's guess until then
    auto trunc_now = [&] {
        if (hist.empty()) return trunc_abs;
        double t = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < ns; ++s) {
            double a = abs_tol(s, hist.back()[s]);
            if (a > 0.0) t = std::min(t, a);
        }
        return std::isfinite(t) ? t : trunc_abs;
    };
    out.levels = fourier_levels(req, kind, strikes, R, trunc_now, set, [&](int level, const std::vector<double>& pr) {
        if (level == 0) hist.clear();
        hist.push_back(pr);
        out.prices = pr;
        if (hist.size() < 3) return false;
        const auto &a = hist[hist.size() - 3], &b = hist[hist.size() - 2], &c = hist.back();
        ok = true;
        for (std::size_t s = 0; s < ns; ++s) {
            out.error_estimates[s] = richardson(a[s], b[s], c[s]);
            if (!(out.error_estimates[s] <= abs_tol(s, c[s]))) ok = false;
        }
        return ok;
    });
    if (!ok && throw_on_failure) {
        double worst = 0.0;
        for (std::size_t s = 0; s < ns; ++s)
            worst = std::max(worst, out.error_estimates[s] / std::max(std::abs(out.prices[s]), 1e-300));
        throw AccuracyError("Fourier pricing did not reach the requested tolerance", out.prices.empty() ? 0.0 : out.prices[0],
                            worst);
    }
    return out;
}

BatchResult fourier_batch(const CharFnRequest& req, Payoff::Kind kind, const std::vector<double>& strikes, double R,
                          const std::vector<double>& abs_tol, const FourierSettings& set, bool throw_on_failure) {
    if (abs_tol.size() != strikes.size()) throw DomainError("fourier_batch: one tolerance per strike");
    double tmin = *std::min_element(abs_tol.begin(), abs_tol.end());
    return fourier_batch_fn(
        req, kind, strikes, R, [&](std::size_t s, double) { return abs_tol[s]; }, tmin, set, throw_on_failure);
}

PriceResult fourier_price(const CharFnRequest& req, const Payoff& payoff, double R, double tol,
                          const FourierSettings& set) {
    if (!(tol > 0.0)) throw DomainError("fourier_price: tol must be positive");
    if (R == 0.0) R = default_damping(req.params, payoff.kind);
    // scale of the price is unknown up front: truncate relative to a conservative floor
    double trunc = tol * 1e-3 * req.params.S0;
    auto res = fourier_batch_fn(
        req, payoff.kind, {payoff.strike}, R, [&](std::size_t, double pr) { return tol * std::abs(pr); }, trunc, set,
        true);
    PriceResult out;
    out.price = res.prices[0];
    out.attained_tol = res.error_estimates[0] / std::max(std::abs(out.price), 1e-300);
    out.levels = res.levels;
    return out;
}

namespace {

double otm_from_call(double call, double S0, double K) { return K < S0 ? call - (S0 - K) : call; }

double vega(double S0, double K, double T, double sigma) {
    double sd = sigma * std::sqrt(T);
    double d1 = (std::log(S0 / K) + 0.5 * sd * sd) / sd;
    return S0 * std::sqrt(T) * std::exp(-0.5 * d1 * d1) / std::sqrt(2.0 * kPi);
}

}  // namespace

SmileResult smile(const CharFnRequest& req, const std::vector<double>& maturities,
                  const std::vector<std::vector<double>>& log_moneyness, double tol, const FourierSettings& set) {
    if (!(tol >= 1e-6)) throw DomainError("smile: tol must be at least 1e-6");
    if (maturities.size() != log_moneyness.size()) throw DomainError("smile: one log-moneyness grid per maturity");
    const auto& p = req.params;
    const double R = default_damping(p, Payoff::Call);
    SmileResult out;
    out.maturities = maturities;
    out.log_moneyness = log_moneyness;
    for (std::size_t m = 0; m < maturities.size(); ++m) {
        const double T = maturities[m];
        const auto& ks = log_moneyness[m];
        std::vector<double> strikes(ks.size());
        for (std::size_t j = 0; j < ks.size(); ++j) strikes[j] = p.S0 * std::exp(ks[j]);
        // implied-vol accuracy tol * sigma translates to price accuracy tol * sigma * vega
        auto abs_tol = [&](std::size_t s, double call) {
            double otm = otm_from_call(call, p.S0, strikes[s]);
            if (!(otm > 0.0) || !(otm < std::min(p.S0, strikes[s]))) return 0.0;
            double sig = implied_vol_otm(otm, p.S0, strikes[s], T);
            return tol * sig * vega(p.S0, strikes[s], T, sig);
        };
        // first-level truncation guess: vega-scaled tolerance under the V0 lognormal, floored
        double trunc = std::numeric_limits<double>::infinity();
        double s0 = std::sqrt(p.V0);
        for (double K : strikes) trunc = std::min(trunc, tol * s0 * vega(p.S0, K, T, s0));
        trunc = std::max(trunc, 1e-10 * tol * p.S0);
        auto res = fourier_batch_fn(at_maturity(req, T), Payoff::Call, strikes, R, abs_tol, trunc, set, true);
        std::vector<double> iv(ks.size());
        double worst = 0.0;
        for (std::size_t j = 0; j < ks.size(); ++j) {
            double otm = otm_from_call(res.prices[j], p.S0, strikes[j]);
            if (!(otm > 0.0))
                throw AccuracyError("smile: out-of-the-money price not positive at k = " + std::to_string(ks[j]),
                                    res.prices[j], 1.0);
            iv[j] = implied_vol_otm(otm, p.S0, strikes[j], T);
            worst = std::max(worst, res.error_estimates[j] / (iv[j] * vega(p.S0, strikes[j], T, iv[j])));
        }
        out.prices.push_back(res.prices);
        out.ivols.push_back(iv);
        out.attained_tol = std::max(out.attained_tol, worst);
    }
    return out;
}

std::vector<std::pair<double, double>> skew(const CharFnRequest& req, const std::vector<double>& maturities, double tol,
                                            const FourierSettings& set) {
    if (!(tol >= 1e-6)) throw DomainError("skew: tol must be at least 1e-6");
    const auto& p = req.params;
    const double R = default_damping(p, Payoff::Call);
    std::vector<std::pair<double, double>> out;
    for (double T : maturities) {
        const double dk = 1e-4 * std::sqrt(T);
        std::vector<double> strikes = {p.S0 * std::exp(-dk), p.S0 * std::exp(dk)};
        std::vector<double> hist;
        double est = std::numeric_limits<double>::infinity();
        double s0 = std::sqrt(p.V0);
        double trunc = 1e-3 * tol * dk * s0 * vega(p.S0, p.S0, T, s0);
        auto value = [&](const std::vector<double>& pr) {
            double lo = implied_vol_otm(otm_from_call(pr[0], p.S0, strikes[0]), p.S0, strikes[0], T);
            double hi = implied_vol_otm(otm_from_call(pr[1], p.S0, strikes[1]), p.S0, strikes[1], T);
            return (hi - lo) / (2.0 * dk);
        };
        bool ok = false;
        fourier_levels(at_maturity(req, T), Payoff::Call, strikes, R, [trunc] { return trunc; }, set,
                       [&](int level, const std::vector<double>& pr) {
                           if (level == 0) hist.clear();
                           hist.push_back(value(pr));
                           if (hist.size() < 3) return false;
                           std::size_t n = hist.size();
                           est = richardson(hist[n - 3], hist[n - 2], hist[n - 1]);
                           ok = est <= tol * std::max(std::abs(hist.back()), 1e-2);
                           return ok;
                       });
        if (!ok) throw AccuracyError("skew did not converge at T = " + std::to_string(T), hist.back(), est);
        out.emplace_back(T, hist.back());
    }
    return out;
}

double rule_horizon(double Tmin, double Tmax, int N) {
    if (!(Tmin > 0.0) || !(Tmax >= Tmin)) throw DomainError("rule_horizon: need 0 < Tmin <= Tmax");
    static const double alpha[] = {0.6, 0.5, 1.0 / 3.0, 0.25, 1.0 / 6.0, 0.1};
    double a = (N >= 1 && N <= 6) ? alpha[N - 1] : 0.0;
    return std::pow(Tmin, a) * std::pow(Tmax, 1.0 - a);
}

double max_relative_error(const std::vector<std::vector<double>>& approx, const std::vector<std::vector<double>>& exact) {
    double worst = 0.0;
    for (std::size_t m = 0; m < exact.size(); ++m)
        for (std::size_t j = 0; j < exact[m].size(); ++j)
            worst = std::max(worst, std::abs(approx[m][j] - exact[m][j]) / std::abs(exact[m][j]));
    return worst;
}

}  // namespace roughmarkov
