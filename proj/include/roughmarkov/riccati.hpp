#pragma once

#include <variant>
#include <vector>

#include "roughmarkov/kernel.hpp"
#include "roughmarkov/math_core.hpp"

namespace roughmarkov {

struct HestonParams {
    double S0 = 1.0;
    double V0 = 0.02;
    double theta = 0.02;
    double lam = 0.3;
    double nu = 0.3;
    double rho = -0.7;

    void validate() const;
};

// theta = 0.02 and theta = 0.3 * 0.02; everything else shared.
HestonParams preset_sec52();
HestonParams preset_sec54();
HestonParams preset(const std::string& name);

inline cplx F(cplx z, cplx x, const HestonParams& p) {
    return 0.5 * (z * z - z) + (p.rho * p.nu * z - p.lam) * x + 0.5 * p.nu * p.nu * x * x;
}

struct RiccatiSolution {
    cplx z;
    std::vector<double> grid;
    std::vector<cplx> psi;
};

RiccatiSolution adams_fractional_riccati(const KernelSpec& spec, const HestonParams& p, cplx z, double T,
                                         int n_steps);
inline RiccatiSolution adams_fractional_riccati(const KernelSpec& spec, const HestonParams& p, cplx z, int n_steps) {
    return adams_fractional_riccati(spec, p, z, spec.T, n_steps);
}
RiccatiSolution markov_riccati(const QuadratureRule& rule, const HestonParams& p, cplx z, double T, int n_steps);

using KernelModel = std::variant<KernelSpec, QuadratureRule>;

struct CharFnRequest {
    KernelModel model;
    HestonParams params;
    double T;
    int n_steps = 64;
};

// E[exp(z log(S_T/S0))]
cplx char_fn(const CharFnRequest& req, cplx z);
// log of the above, without the final exponential
cplx log_char_fn(const CharFnRequest& req, cplx z);

}  // namespace roughmarkov
