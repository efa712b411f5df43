#include <doctest.h>

#include <cmath>
#include <random>

#include "roughmarkov/errors.hpp"
#include "roughmarkov/optimizers.hpp"
#include "roughmarkov/quadrature.hpp"

using namespace roughmarkov;

TEST_CASE("nelder-mead on a shifted quadratic") {
    auto f = [](const std::vector<double>& x) { return std::pow(x[0] - 1.5, 2) + 3.0 * std::pow(x[1] + 0.5, 2); };
    auto r = nelder_mead(f, {0.0, 0.0}, 0.5, 2000);
    CHECK(r.x[0] == doctest::Approx(1.5).epsilon(1e-5));
    CHECK(r.x[1] == doctest::Approx(-0.5).epsilon(1e-5));
    CHECK(r.evals <= 2000);
}

TEST_CASE("nonnegative quadratic solve") {
    // unconstrained optimum has a negative second coordinate
    std::vector<double> G = {2.0, 1.0, 1.0, 2.0}, b = {1.0, -2.0};
    auto w = nonneg_quadratic(G, b, 2);
    CHECK(w[1] == 0.0);
    CHECK(w[0] == doctest::Approx(0.5));
    // interior case solves the normal equations
    std::vector<double> b2 = {3.0, 3.0};
    auto v = nonneg_quadratic(G, b2, 2);
    for (int i = 0; i < 2; ++i) CHECK(std::abs(G[2 * i] * v[0] + G[2 * i + 1] * v[1] - b2[i]) < 1e-12);
}

TEST_CASE("optimal weights satisfy the normal equations") {
    const double H = 0.1, T = 1.0;
    std::vector<double> nodes = {0.3, 4.0, 50.0, 700.0}, w;
    l2_weights(H, T, nodes, w);
    for (double x : w) REQUIRE(x > 0.0);
    // gradient of the L2 error in each weight vanishes
    KernelSpec spec(H, T);
    double base = l2_error(spec, QuadratureRule(nodes, w));
    for (std::size_t i = 0; i < w.size(); ++i) {
        auto up = w, dn = w;
        up[i] *= 1.0 + 1e-5;
        dn[i] *= 1.0 - 1e-5;
        double e1 = l2_error(spec, QuadratureRule(nodes, up)), e2 = l2_error(spec, QuadratureRule(nodes, dn));
        CHECK(std::abs(e1 - e2) / (2e-5 * base) < 1e-4);
    }
}

TEST_CASE("opt_l2 beats the simple references and respects the bound") {
    const double H = 0.1, T = 1.0;
    KernelSpec spec(H, T);
    auto one = opt_l2(H, T, 1, INFINITY);
    CHECK(one.error < l2_error(spec, ae_rule(H, T, 1)));
    CHECK(one.rule.size() == 1);
    auto gg = geometric_rule(H, T, 4);
    auto r = opt_l2(H, T, static_cast<int>(gg.size()), INFINITY);
    CHECK(r.error <= l2_error(spec, gg) * (1 + 1e-12));
    CHECK(r.error == doctest::Approx(l2_error(spec, r.rule)).epsilon(1e-9));
    auto b = opt_l2(H, T, 3, 10.0);
    CHECK(b.bound == 10.0);
    CHECK(b.rule.max_node() <= 10.0 * (1 + 1e-12));
    CHECK_THROWS_AS(opt_l2(0.0, T, 2, INFINITY), DomainError);
    CHECK_THROWS_AS(opt_l2(-0.1, T, 2, INFINITY), DomainError);
}

TEST_CASE("opt_l1 improves on geometric rules") {
    OptBudget budget;
    budget.max_evals = 3000;
    budget.restarts = 1;
    for (double H : {-0.1, 0.1}) {
        KernelSpec spec(H, 1.0);
        for (int N : {1, 2}) {
            auto gg = geometric_rule(H, 1.0, N);
            auto r = opt_l1(H, 1.0, static_cast<int>(gg.size()), budget);
            double e_gg = l1_error_intersections(spec, gg, 1e-8).absolute_l1;
            CHECK(r.error <= e_gg * (1 + 1e-9));
            CHECK(std::isinf(r.bound));
        }
    }
}

TEST_CASE("opt_l1 recovers the constant kernel") {
    auto r = opt_l1(0.5, 1.0, 1);
    CHECK(r.error < 1e-6);
    CHECK(r.rule.weights[0] == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(r.rule.nodes[0] < 1e-5);
}

TEST_CASE("opt_l1 error decreases with node count") {
    OptBudget budget;
    budget.max_evals = 3000;
    budget.restarts = 1;
    double prev = INFINITY;
    for (int N = 1; N <= 3; ++N) {
        auto r = opt_l1(0.1, 1.0, N, budget);
        CHECK(r.error <= prev * (1 + 1e-6));
        prev = r.error;
    }
}

TEST_CASE("bl2 single node is the unbounded L2 optimum") {
    auto a = bl2(0.1, 1.0, 1);
    auto b = opt_l2(0.1, 1.0, 1, INFINITY);
    CHECK(a.nodes == b.rule.nodes);
    CHECK(a.weights == b.rule.weights);
    CHECK_THROWS_AS(bl2(0.1, 1.0, 2, 1.3), DomainError);
}

TEST_CASE("bl2 terminates with finite nodes and round-trips") {
    KernelSpec spec(0.1, 1.0);
    auto r = bl2(0.1, 1.0, 3);
    CHECK(r.size() == 3);
    CHECK(std::isfinite(r.max_node()));
    CHECK(l1_error_intersections(spec, r, 1e-8).absolute_l1 < l1_error_intersections(spec, bl2(0.1, 1.0, 2), 1e-8).absolute_l1);
    KernelSpec back(0.3, 3.0);
    auto again = rule_from_json(rule_to_json(spec, r), &back);
    CHECK(again.nodes == r.nodes);
    CHECK(again.weights == r.weights);
    CHECK(back.H == spec.H);
}
