#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "roughmarkov/errors.hpp"
#include "roughmarkov/kernel.hpp"
#include "roughmarkov/math_core.hpp"
#include "roughmarkov/quadrature.hpp"

using namespace roughmarkov;

namespace {

double moment(double H, double a, int k) {
    double cH = 1.0 / (roughmarkov::gamma(H + 0.5) * roughmarkov::gamma(0.5 - H));
    return cH * std::pow(a, k + 0.5 - H) / (k + 0.5 - H);
}

// Gauss rule for y^b on [0, 1] from the closed-form Jacobi recurrence
// (alpha = 0, beta = b on [-1, 1], mapped to [0, 1]).
NodesWeights jacobi_oracle(int m, double b) {
    Eigen::VectorXd diag(m), sub(std::max(m - 1, 0));
    for (int n = 0; n < m; ++n) {
        double s = 2.0 * n + b;
        double an = n == 0 ? b / (b + 2.0) : b * b / (s * (s + 2.0));
        diag[n] = 0.5 * (1.0 + an);
        if (n >= 1) {
            double bn = 4.0 * n * n * (n + b) * (n + b) / (s * s * (s + 1.0) * (s - 1.0));
            sub[n - 1] = std::sqrt(bn / 4.0);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub);
    NodesWeights r;
    double mu0 = 1.0 / (1.0 + b);
    for (int k = 0; k < m; ++k) {
        r.nodes.push_back(es.eigenvalues()[k]);
        double v = es.eigenvectors()(0, k);
        r.weights.push_back(mu0 * v * v);
    }
    return r;
}

}  // namespace

TEST_CASE("Gauss-Legendre") {
    auto g1 = gauss_legendre(1, 2.0, 5.0);
    CHECK(g1.nodes[0] == doctest::Approx(3.5));
    CHECK(g1.weights[0] == doctest::Approx(3.0));
    auto g2 = gauss_legendre(2, -1.0, 1.0);
    CHECK(g2.nodes[0] == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-15));
    CHECK(g2.nodes[1] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
    CHECK(g2.weights[0] == doctest::Approx(1.0).epsilon(1e-15));
    auto g3 = gauss_legendre(2, 0.0, 1.0);
    double s = 0.0;
    for (int i = 0; i < 2; ++i) s += g3.weights[i] * std::pow(g3.nodes[i], 3);
    CHECK(s == doctest::Approx(0.25).epsilon(1e-15));
    for (int m : {5, 17, 40, 64}) {
        auto g = gauss_legendre(m, 0.0, 2.0);
        for (int k = 0; k < 2 * m; k += 3) {
            double q = 0.0;
            for (int i = 0; i < m; ++i) q += g.weights[i] * std::pow(g.nodes[i], k);
            CHECK(std::abs(q / (std::pow(2.0, k + 1) / (k + 1)) - 1.0) < 1e-12);
        }
    }
    CHECK_THROWS_AS(gauss_legendre(3, 1.0, 1.0), DomainError);
}

TEST_CASE("singular-weight Gauss") {
    for (double H : {-0.3, 0.1, 0.4}) {
        auto g = gauss_singular(1, 2.0, H);
        double cH = 1.0 / (roughmarkov::gamma(H + 0.5) * roughmarkov::gamma(0.5 - H));
        CHECK(g.nodes[0] == doctest::Approx(2.0 * (0.5 - H) / (1.5 - H)).epsilon(1e-13));
        CHECK(g.weights[0] == doctest::Approx(cH * std::pow(2.0, 0.5 - H) / (0.5 - H)).epsilon(1e-13));
    }
    for (double H : {-0.4, 0.0, 0.1, 0.4})
        for (double a : {0.1, 1.0, 10.0})
            for (int m = 1; m <= 10; ++m) {
                auto g = gauss_singular(m, a, H);
                double mass = 0.0;
                for (int i = 0; i < m; ++i) {
                    CHECK(g.nodes[i] > 0.0);
                    CHECK(g.nodes[i] < a);
                    CHECK(g.weights[i] > 0.0);
                    mass += g.weights[i];
                }
                CHECK(std::abs(mass / moment(H, a, 0) - 1.0) < 1e-12);
                for (int k = 0; k < 2 * m; ++k) {
                    double q = 0.0;
                    for (int i = 0; i < m; ++i) q += g.weights[i] * std::pow(g.nodes[i], k);
                    CHECK(std::abs(q / moment(H, a, k) - 1.0) < 1e-10);
                }
            }
    auto leg = gauss_singular(2, 1.0, 0.5);
    auto ref = gauss_legendre(2, 0.0, 1.0);
    CHECK(leg.nodes == ref.nodes);
    CHECK(leg.weights == ref.weights);
    CHECK_THROWS_AS(gauss_singular(3, 1.0, -0.5), DomainError);
    CHECK_THROWS_AS(gauss_singular(33, 1.0, 0.1), DomainError);
}

TEST_CASE("singular-weight Gauss matches the Jacobi recurrence") {
    for (double H : {-0.25, 0.1, 0.45})
        for (int m : {3, 12, 24, 32}) {
            auto g = gauss_singular(m, 1.0, H);
            auto o = jacobi_oracle(m, -H - 0.5);
            double cH = 1.0 / (roughmarkov::gamma(H + 0.5) * roughmarkov::gamma(0.5 - H));
            for (int i = 0; i < m; ++i) {
                CHECK(std::abs(g.nodes[i] - o.nodes[i]) < 1e-12);
                CHECK(std::abs(g.weights[i] / (cH * o.weights[i]) - 1.0) < 1e-8);
            }
        }
}

TEST_CASE("geometric rule geometry") {
    auto part = gg_partition(0.1, 1.0, 4, GGParams::defaults(1.0));
    CHECK(part.m == 2);
    CHECK(part.n == 3);
    auto rule = geometric_rule(0.1, 1.0, 4);
    CHECK(rule.size() == 6);
    auto r10 = geometric_rule(0.1, 1.0, 10);
    CHECK(std::abs(std::log10(r10.max_node()) - 2.75) <= 0.3);
    GGParams bad = GGParams::defaults(1.0);
    bad.a = 1e6;
    CHECK_THROWS_AS(geometric_rule(0.1, 1.0, 4, bad), ConstructionError);
    auto half = geometric_rule(0.5, 1.0, 8);
    CHECK(half.size() == 1);
    CHECK(half.nodes[0] == 0.0);
}

TEST_CASE("non-geometric rule geometry") {
    NGGParams p = NGGParams::defaults(1.0);
    auto part = ngg_partition(0.1, 1.0, 16, p);
    double e = std::pow(3.0, 0.6 / (2.0 * part.m));
    double r = (kNggC0 + e) / (kNggC0 - e);
    CHECK(part.xi[1] == 3.0);
    CHECK(part.xi[2] == doctest::Approx(r * r * 3.0).epsilon(1e-15));
    // H=0.1, N=4: m=1, n=3, largest node is the midpoint of [xi_2, xi_3]
    auto p4 = ngg_partition(0.1, 1.0, 4, p);
    REQUIRE(p4.m == 1);
    REQUIRE(p4.n == 3);
    auto r4 = non_geometric_rule(0.1, 1.0, 4);
    CHECK(r4.max_node() == doctest::Approx(0.5 * (p4.xi[2] + p4.xi[3])).epsilon(1e-14));
    CHECK(std::abs(std::log10(r4.max_node()) - 2.186) < 0.005);
    NGGParams bad{1.01, kNggBeta0, 3.0};
    try {
        non_geometric_rule(0.4, 1.0, 16, bad);
        FAIL("expected a construction error");
    } catch (const ConstructionError& err) {
        CHECK(err.failing_index == 1);
    }
}

TEST_CASE("constructor outputs are lower-biased") {
    for (double H : {-0.1, 0.1})
        for (int N : {1, 2, 4, 9, 16, 32, 64}) {
            KernelSpec spec(H, 1.0);
            for (const auto& rule : {geometric_rule(H, 1.0, N), non_geometric_rule(H, 1.0, N)}) {
                double worst = -1.0;
                for (int i = 0; i < 200; ++i) {
                    double t = std::pow(10.0, -8.0 + 8.0 * i / 199.0);
                    worst = std::max(worst, (eval_KN(rule, t) - eval_K(spec, t)) / eval_K(spec, t));
                }
                CHECK(worst <= 1e-12);
            }
        }
}

TEST_CASE("eta ODE") {
    // linearization at the origin
    double c = 5.0, beta = 1.0, t = 1e-4;
    double lin = 2.0 * t * std::log(1.0 + 2.0 / (c - 1.0));
    CHECK(std::abs(eta_ode(c, beta, t) - lin) < 1e-7);
    // away from the boundary the solution is smooth and finite
    double T0 = eta_explosion_time(c, beta);
    CHECK(T0 > 1.0);
    double e1 = eta_ode(c, beta, 1.0);
    CHECK(e1 > 0.0);
    CHECK(e1 < 2.0 * std::log(c));
    CHECK_THROWS_AS(eta_ode(c, beta, 2.0 * T0), ExplosionError);
    CHECK_THROWS_AS(eta_ode(0.5, beta, 1.0), DomainError);
}

TEST_CASE("eta ODE at the rate-optimal constants") {
    // (c0, beta0) sit on the explosion boundary at t = 1; the solution value
    // there is the finite limit 2 beta0^2 log c0.
    double T0 = eta_explosion_time(kNggC0, kNggBeta0);
    CHECK(std::abs(T0 - 1.0) < 1e-4);
    double eta_star = 2.0 * kNggBeta0 * kNggBeta0 * std::log(kNggC0);
    double eta = eta_ode(kNggC0, kNggBeta0, T0 * (1.0 - 1e-12));
    CHECK(std::abs(eta / kNggBeta0 - kNggRate) < 1e-6);
    CHECK(std::abs(eta - eta_star) < 1e-6);
    // slightly larger c moves the explosion past t = 1
    CHECK(eta_explosion_time(kNggC0 * 1.001, kNggBeta0) > 1.0);
}

TEST_CASE("AE rule") {
    for (int N : {1, 2, 5, 20}) {
        double H = 0.1, pi = ae_partition_width(H, 1.0, N);
        auto rule = ae_rule(H, 1.0, N);
        REQUIRE(rule.size() == std::size_t(N));
        double total = 0.0;
        for (int i = 0; i < N; ++i) {
            CHECK(rule.weights[i] > 0.0);
            CHECK(rule.nodes[i] > i * pi);
            CHECK(rule.nodes[i] < (i + 1) * pi);
            total += rule.weights[i];
        }
        double cH = KernelSpec(H, 1.0).c_H();
        CHECK(total == doctest::Approx(cH * std::pow(N * pi, 0.4) / 0.4).epsilon(1e-13));
    }
    CHECK(std::abs(std::log10(ae_rule(0.1, 1.0, 2).max_node()) - 0.03) <= 0.3);
}
