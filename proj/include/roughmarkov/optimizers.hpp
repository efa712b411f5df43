#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "roughmarkov/kernel.hpp"

namespace roughmarkov {

struct OptBudget {
    int max_evals = 20000;
    int restarts = 3;
    std::uint64_t seed = 20240607;
    bool verbose = false;  // JSON-lines telemetry on stderr
};

struct BoundedOptResult {
    QuadratureRule rule;
    double error = 0.0;
    double bound = std::numeric_limits<double>::infinity();
};

struct NelderMeadResult {
    std::vector<double> x;
    double f;
    int evals;
};

// Minimizes f from x0 with initial simplex edge `step`; restarts the simplex
// around the incumbent until a restart no longer improves it.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                             double step, int max_evals, double ftol = 1e-13);

// Nonnegative minimizer of w'Gw - 2b'w for symmetric positive semidefinite G.
std::vector<double> nonneg_quadratic(const std::vector<double>& G, const std::vector<double>& b, int n);

// L2-optimal rule with N nodes in [0, L]. `init` optionally seeds the node search.
BoundedOptResult opt_l2(double H, double T, int N, double L, const OptBudget& budget = {},
                        const std::vector<double>* init = nullptr);
BoundedOptResult opt_l1(double H, double T, int N, const OptBudget& budget = {});
QuadratureRule bl2(double H, double T, int N, double q = 1.1, double epsilon = 0.0, const OptBudget& budget = {});

// Optimal weights for fixed nodes and the value of ||K^N||^2 - 2<K, K^N> on [0, T].
// Finite for every H > -1/2, so it also serves as the bounded-node objective when H <= 0.
double l2_weights(double H, double T, const std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace roughmarkov
