#pragma once

#include <cmath>
#include <vector>

#include "roughmarkov/kernel.hpp"

namespace roughmarkov {

struct NodesWeights {
    std::vector<double> nodes;
    std::vector<double> weights;
};

struct PanelPartition {
    std::vector<double> xi;  // xi[0] = 0 < xi[1] < ... < xi[n]
    int m = 1;
    int n = 1;
};

struct GGParams {
    double alpha = std::log(3.0 + 2.0 * std::sqrt(2.0));
    double beta = 1.0;
    double a;  // default 4/T
    double b;  // default 1/(2T)
    static GGParams defaults(double T) { return GGParams{std::log(3.0 + 2.0 * std::sqrt(2.0)), 1.0, 4.0 / T, 0.5 / T}; }
};

// Constants solving the NGG rate optimization.
inline constexpr double kNggC0 = 3.60585021;
inline constexpr double kNggBeta0 = 0.92993273;
inline constexpr double kNggRate = 2.3853845446404978;

struct NGGParams {
    double c = kNggC0;
    double beta = kNggBeta0;
    double a;  // default 3/T
    static NGGParams defaults(double T) { return NGGParams{kNggC0, kNggBeta0, 3.0 / T}; }
};

NodesWeights gauss_legendre(int m, double a, double b);
// Gauss rule on [0, a] for the weight c_H x^(-H-1/2). At H = 1/2 this is
// Legendre with unit weight.
NodesWeights gauss_singular(int m, double a, double H);

int round_positive(double v);
PanelPartition gg_partition(double H, double T, int N, const GGParams& p);
PanelPartition ngg_partition(double H, double T, int N, const NGGParams& p);
// Singular panel on [0, xi_1], Legendre panels with weight c_H x^(-H-1/2) after.
QuadratureRule rule_from_partition(double H, const PanelPartition& part);

QuadratureRule geometric_rule(double H, double T, int N, const GGParams& p);
QuadratureRule geometric_rule(double H, double T, int N);
QuadratureRule non_geometric_rule(double H, double T, int N, const NGGParams& p);
QuadratureRule non_geometric_rule(double H, double T, int N);

// eta' = 2 log(1 + 2E/(c - E)), E = exp(eta/(2 beta^2)), eta(0) = 0.
double eta_ode(double c, double beta, double t_end);
// Time at which E reaches c.
double eta_explosion_time(double c, double beta);

// Partition width pi_N for the AE rule; see config.hpp.
double ae_partition_width(double H, double T, int N);
QuadratureRule ae_rule(double H, double T, int N);

}  // namespace roughmarkov
