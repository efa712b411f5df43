#pragma once

#include <string>
#include <vector>

namespace roughmarkov {

// K(t) = t^(H-1/2) / Gamma(H+1/2) on [0, T].
struct KernelSpec {
    double H;
    double T;

    KernelSpec(double H, double T);
    bool is_constant() const { return H == 0.5; }
    // c_H = 1 / (Gamma(H+1/2) Gamma(1/2-H)); undefined at H = 1/2.
    double c_H() const;
    double norm_l1() const;
};

// K^N(t) = sum_i w_i exp(-x_i t).
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    QuadratureRule() = default;
    // Validates; nodes must already be strictly ascending.
    QuadratureRule(std::vector<double> nodes, std::vector<double> weights);
    // Sorts and merges coincident nodes by summing weights.
    static QuadratureRule from_unsorted(std::vector<double> nodes, std::vector<double> weights);

    std::size_t size() const { return nodes.size(); }
    bool empty() const { return nodes.empty(); }
    double max_node() const { return nodes.empty() ? 0.0 : nodes.back(); }
};

struct ErrorReport {
    double absolute_l1 = 0.0;
    double relative_l1 = 0.0;
    std::vector<double> crossings;
    long kernel_evaluations = 0;
    double tolerance_used = 0.0;
};

double eval_K(const KernelSpec& spec, double t);
double eval_KN(const QuadratureRule& rule, double t);

// Exact for rules with K^N <= K on (0, T]. Returned unmodified otherwise.
double l1_error_lower_biased(const KernelSpec& spec, const QuadratureRule& rule);
ErrorReport l1_error_intersections(const KernelSpec& spec, const QuadratureRule& rule, double tol);
// Absolute L2 error on [0, T]; requires H > 0.
double l2_error(const KernelSpec& spec, const QuadratureRule& rule);
double norm_l2(const KernelSpec& spec);

// {"H","T","nodes","weights"}
std::string rule_to_json(const KernelSpec& spec, const QuadratureRule& rule);
QuadratureRule rule_from_json(const std::string& text, KernelSpec* spec_out = nullptr);
void write_rule_file(const std::string& path, const KernelSpec& spec, const QuadratureRule& rule);
QuadratureRule read_rule_file(const std::string& path, KernelSpec* spec_out = nullptr);

}  // namespace roughmarkov
