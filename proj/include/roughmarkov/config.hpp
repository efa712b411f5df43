#pragma once

#include <cmath>

namespace roughmarkov::config {

// AE rule (Abi Jaber & El Euch, "Multifactor approximation of rough volatility
// models", SIAM J. Financial Math. 10(2), 2019, Section 4.2): uniform mass
// partition of [0, N pi_N] with
//   pi_N = N^(-1/5) / T * (sqrt(10) alpha / (2 + alpha))^(2/5),  alpha = H + 1/2.
inline constexpr double kAePiExponentN = -0.2;
inline constexpr double kAePiScaleNum = 3.1622776601683795;  // sqrt(10)
inline constexpr double kAePiOuterExponent = 0.4;

inline double ae_pi(double H, double T, int N) {
    double alpha = H + 0.5;
    return std::pow(double(N), kAePiExponentN) / T * std::pow(kAePiScaleNum * alpha / (2.0 + alpha), kAePiOuterExponent);
}

// Relative noise floor in the BL2 stopping test err2 > (1 - eps) err1; same size as the optimizer slack.
inline constexpr double kBl2NoiseFloor = 1e-9;

}  // namespace roughmarkov::config
