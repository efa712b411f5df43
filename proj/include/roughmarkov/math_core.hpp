#pragma once

#include <cmath>
#include <complex>

namespace roughmarkov {

using cplx = std::complex<double>;

double gamma(double x);
double lower_incomplete_gamma(double s, double x);

double norm_cdf(double x);

// (1 - exp(-x d)) / x, i.e. the integral of exp(-x s) over [0, d]. Series near x d = 0,
// where the plain form loses every digit for subnormal x.
inline double decay_integral(double x, double d) {
    double y = x * d;
    if (std::abs(y) < 1e-5) return d * (1.0 - y * (0.5 - y / 6.0));
    return -std::expm1(-y) / x;
}

// Zero rates, no dividends.
double bs_call_price(double S0, double strike, double T, double sigma);
double bs_put_price(double S0, double strike, double T, double sigma);
// Cash-or-nothing digital call paying 1 if S_T > strike.
double bs_digital_price(double S0, double strike, double T, double sigma);

// Implied vol from a call price. Works on the out-of-the-money side internally
// (puts for strike < S0) so deep in-the-money quotes keep their time value.
double implied_vol(double price, double S0, double strike, double T);
// Same, from the out-of-the-money quote (put if strike < S0, else call).
double implied_vol_otm(double otm_price, double S0, double strike, double T);

}  // namespace roughmarkov
