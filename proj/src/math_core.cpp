#include "roughmarkov/math_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

#include "roughmarkov/errors.hpp"

namespace roughmarkov {

double gamma(double x) {
    if (x <= 0.0 && x == std::floor(x))
        throw DomainError("gamma: pole at nonpositive integer");
    return std::tgamma(x);
}

double lower_incomplete_gamma(double s, double x) {
    if (!(s > 0.0)) throw DomainError("lower_incomplete_gamma: s must be positive");
    if (!(x >= 0.0)) throw DomainError("lower_incomplete_gamma: x must be nonnegative");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return std::tgamma(s);
    return boost::math::tgamma_lower(s, x);
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

namespace {

struct D12 {
    double d1, d2;
};

D12 d12(double S0, double strike, double T, double sigma) {
    double sd = sigma * std::sqrt(T);
    double d1 = (std::log(S0 / strike) + 0.5 * sd * sd) / sd;
    return {d1, d1 - sd};
}

void check_inputs(double S0, double strike, double T, double sigma) {
    if (!(S0 > 0.0) || !(strike > 0.0) || !(T > 0.0) || !(sigma >= 0.0))
        throw DomainError("Black-Scholes: need S0, strike, T > 0 and sigma >= 0");
}

// Out-of-the-money price and its vega; puts below the forward.
double otm_price(double S0, double strike, double T, double sigma) {
    return strike < S0 ? bs_put_price(S0, strike, T, sigma) : bs_call_price(S0, strike, T, sigma);
}

double vega(double S0, double strike, double T, double sigma) {
    auto [d1, d2] = d12(S0, strike, T, sigma);
    (void)d2;
    return S0 * std::sqrt(T) * std::exp(-0.5 * d1 * d1) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

double bs_call_price(double S0, double strike, double T, double sigma) {
    check_inputs(S0, strike, T, sigma);
    if (sigma == 0.0) return std::max(S0 - strike, 0.0);
    auto [d1, d2] = d12(S0, strike, T, sigma);
    return S0 * norm_cdf(d1) - strike * norm_cdf(d2);
}

double bs_put_price(double S0, double strike, double T, double sigma) {
    check_inputs(S0, strike, T, sigma);
    if (sigma == 0.0) return std::max(strike - S0, 0.0);
    auto [d1, d2] = d12(S0, strike, T, sigma);
    return strike * norm_cdf(-d2) - S0 * norm_cdf(-d1);
}

double bs_digital_price(double S0, double strike, double T, double sigma) {
    check_inputs(S0, strike, T, sigma);
    if (sigma == 0.0) return S0 > strike ? 1.0 : 0.0;
    return norm_cdf(d12(S0, strike, T, sigma).d2);
}

double implied_vol_otm(double price, double S0, double strike, double T);

double implied_vol(double price, double S0, double strike, double T) {
    check_inputs(S0, strike, T, 0.0);
    double intrinsic = std::max(S0 - strike, 0.0);
    if (!(price > intrinsic) || !(price < S0))
        throw DomainError("implied_vol: price outside arbitrage bounds");
    // put-call parity with zero rates
    double otm = strike < S0 ? price - (S0 - strike) : price;
    return implied_vol_otm(otm, S0, strike, T);
}

// Safeguarded Newton on log(price) with a maintained bracket.
double implied_vol_otm(double price, double S0, double strike, double T) {
    double upper = std::min(S0, strike);
    if (!(price > 0.0) || !(price < upper))
        throw DomainError("implied_vol: price outside arbitrage bounds");
    double target = std::log(price);
    double lo = 0.0, hi = 1.0;
    while (otm_price(S0, strike, T, hi) < price) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6) throw ConvergenceError("implied_vol: cannot bracket");
    }
    double k = std::log(strike / S0);
    // Brenner-Subrahmanyam near the money, widened by the moneyness term.
    double sigma = std::sqrt(2.0 * std::numbers::pi / T) * price / S0 + std::sqrt(2.0 * std::abs(k) / T);
    if (!(sigma > lo && sigma < hi)) sigma = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        double p = otm_price(S0, strike, T, sigma);
        if (p > 0.0) {
            if (p > price) hi = sigma; else lo = sigma;
        } else {
            lo = sigma;
        }
        double next;
        double v = vega(S0, strike, T, sigma);
        if (p > 0.0 && v > 0.0) {
            next = sigma - (std::log(p) - target) * p / v;
        } else {
            next = 0.5 * (lo + hi);
        }
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        double step = std::abs(next - sigma);
        sigma = next;
        if (step <= 1e-15 * std::max(1.0, sigma) || hi - lo <= 1e-15 * std::max(1.0, sigma)) return sigma;
    }
    return sigma;
}

}  // namespace roughmarkov
