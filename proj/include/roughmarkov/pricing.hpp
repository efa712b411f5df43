#pragma once

#include <utility>
#include <vector>

#include "roughmarkov/riccati.hpp"

namespace roughmarkov {

struct Payoff {
    enum Kind { Call, Digital } kind = Call;
    double strike = 1.0;
};

// True iff E[S_T^q] is finite under the Heston-type moment condition.
bool moment_check(const HestonParams& p, double q);

// Damping used when the caller passes R = 0: 2 for calls (1.5 if the second
// moment fails), 0.5 for digitals.
double default_damping(const HestonParams& p, Payoff::Kind kind);

struct PriceResult {
    double price = 0.0;
    double attained_tol = 0.0;  // relative
    int levels = 0;
};

struct FourierSettings {
    double h0 = 0.0;       // initial u spacing; 0 picks one from the tolerance
    int n_steps0 = 64;     // Riccati steps at the first level
    int max_levels = 8;
    int threads = 1;
    bool verbose = false;  // one JSON line per level on stderr
};

// (1/2pi) int phi(R - iu) fhat(u + iR) du with nested refinement.
PriceResult fourier_price(const CharFnRequest& req, const Payoff& payoff, double R, double tol,
                          const FourierSettings& set = {});

// Several strikes of one payoff type from shared characteristic-function
// values. `abs_tol[i]` is the absolute price accuracy wanted for strike i.
// Returns per-strike prices and attained absolute error estimates.
struct BatchResult {
    std::vector<double> prices;
    std::vector<double> error_estimates;
    int levels = 0;
};
BatchResult fourier_batch(const CharFnRequest& req, Payoff::Kind kind, const std::vector<double>& strikes, double R,
                          const std::vector<double>& abs_tol, const FourierSettings& set = {},
                          bool throw_on_failure = true);

struct SmileResult {
    std::vector<double> maturities;
    std::vector<std::vector<double>> log_moneyness;
    std::vector<std::vector<double>> prices;  // call prices
    std::vector<std::vector<double>> ivols;
    double attained_tol = 0.0;  // relative implied-vol error estimate
};

// Calls priced on the out-of-the-money side; tolerance is relative in implied vol.
SmileResult smile(const CharFnRequest& req, const std::vector<double>& maturities,
                  const std::vector<std::vector<double>>& log_moneyness, double tol, const FourierSettings& set = {});

// ATM skew d sigma / dk by central difference with step 1e-4 sqrt(T).
std::vector<std::pair<double, double>> skew(const CharFnRequest& req, const std::vector<double>& maturities,
                                            double tol, const FourierSettings& set = {});

// Horizon for a single rule serving maturities in [Tmin, Tmax].
double rule_horizon(double Tmin, double Tmax, int N);

double max_relative_error(const std::vector<std::vector<double>>& approx,
                          const std::vector<std::vector<double>>& exact);

}  // namespace roughmarkov
