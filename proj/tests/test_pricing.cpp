#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "roughmarkov/errors.hpp"
#include "roughmarkov/math_core.hpp"
#include "roughmarkov/pricing.hpp"
#include "roughmarkov/quadrature.hpp"

using namespace roughmarkov;

namespace {

HestonParams flat(double V0) {
    HestonParams p;
    p.V0 = V0;
    p.theta = p.lam = p.nu = 0.0;
    return p;
}

}  // namespace

TEST_CASE("moment condition") {
    HestonParams p = preset_sec52();
    CHECK(moment_check(p, 1.0));
    CHECK(moment_check(p, 0.0));
    CHECK(moment_check(p, 2.0));
    CHECK_FALSE(moment_check(p, 6.0));
    p.rho = 0.9;
    p.nu = 1.0;
    p.lam = 0.1;
    CHECK_FALSE(moment_check(p, 2.0));
    CHECK(default_damping(p, Payoff::Call) == 1.5);
    CHECK(default_damping(preset_sec52(), Payoff::Call) == 2.0);
    CHECK(default_damping(preset_sec52(), Payoff::Digital) == 0.5);
    CharFnRequest rq{KernelSpec(0.1, 1.0), p, 1.0, 64};
    CHECK_THROWS_AS(fourier_price(rq, {Payoff::Call, 1.0}, 2.0, 1e-4), DomainError);
    CHECK_THROWS_AS(fourier_price(rq, {Payoff::Call, 1.0}, 0.5, 1e-4), DomainError);
    CHECK_THROWS_AS(fourier_price(rq, {Payoff::Digital, 1.0}, 1.5, 1e-4), DomainError);
}

TEST_CASE("constant variance reduces to Black-Scholes") {
    const double V0 = 0.04, T = 0.5;
    for (const KernelModel& m : {KernelModel(KernelSpec(0.1, T)), KernelModel(QuadratureRule({0.0}, {1.0}))}) {
        CharFnRequest rq{m, flat(V0), T, 64};
        for (double K : {0.6, 0.9, 1.0, 1.1, 1.4}) {
            double c = fourier_price(rq, {Payoff::Call, K}, 2.0, 1e-7).price;
            double d = fourier_price(rq, {Payoff::Digital, K}, 0.5, 1e-7).price;
            CHECK(std::abs(c / bs_call_price(1.0, K, T, 0.2) - 1.0) < 1e-5);
            CHECK(std::abs(d / bs_digital_price(1.0, K, T, 0.2) - 1.0) < 1e-5);
        }
    }
}

TEST_CASE("deep in-the-money call tends to the forward") {
    CharFnRequest rq{KernelSpec(0.1, 1.0), preset_sec52(), 1.0, 64};
    auto r = fourier_price(rq, {Payoff::Call, 1e-6}, 2.0, 1e-5);
    CHECK(std::abs(r.price - 1.0) < 1e-5);
    CHECK(r.attained_tol <= 1e-5);
}

TEST_CASE("classical Heston prices through the one-node rule") {
    HestonParams p = preset_sec52();
    oracle::Heston h{p.V0, p.theta, p.lam, p.nu, p.rho};
    auto ref_call = [&](double K) {
        // Lewis form, trapezoid far past convergence
        const cplx i(0.0, 1.0);
        double k = std::log(K), s = 0.0, du = 0.01;
        for (int j = 0; j < 40000; ++j) {
            double u = j * du;
            cplx zeta(u, 2.0);
            cplx v = std::exp(h.log_cf(cplx(2.0, -u), 1.0)) * std::exp((1.0 + i * zeta) * k) / (i * zeta * (1.0 + i * zeta));
            s += (j ? du : 0.5 * du) * v.real();
        }
        return s / M_PI;
    };
    CharFnRequest rq{QuadratureRule({0.0}, {1.0}), p, 1.0, 64};
    for (double K : {0.8, 1.0, 1.2}) {
        auto r = fourier_price(rq, {Payoff::Call, K}, 2.0, 1e-6);
        CHECK(std::abs(r.price / ref_call(K) - 1.0) < 1e-5);
    }
}

TEST_CASE("flat smile for deterministic variance") {
    CharFnRequest rq{QuadratureRule({0.0}, {1.0}), flat(0.03), 1.0, 64};
    std::vector<double> ks;
    for (int i = 0; i <= 10; ++i) ks.push_back(-0.5 + 0.08 * i);
    auto s = smile(rq, {0.5, 1.0}, {ks, ks}, 1e-5);
    for (const auto& row : s.ivols)
        for (double v : row) CHECK(std::abs(v / std::sqrt(0.03) - 1.0) < 1e-5);
    CHECK(s.attained_tol <= 1e-5);
    CHECK_THROWS_AS(smile(rq, {1.0}, {ks}, 1e-7), DomainError);
}

TEST_CASE("smile is arbitrage free and carries its accuracy") {
    CharFnRequest rq{geometric_rule(0.1, 1.0, 6), preset_sec52(), 1.0, 64};
    std::vector<double> ks;
    for (int i = 0; i <= 20; ++i) ks.push_back(-0.6 + 0.05 * i);
    auto s = smile(rq, {1.0}, {ks}, 1e-4);
    CHECK(s.attained_tol <= 1e-4);
    const auto& c = s.prices[0];
    for (std::size_t j = 1; j < c.size(); ++j) CHECK(c[j] < c[j - 1]);
    // convexity in strike on the non-uniform strike grid
    for (std::size_t j = 1; j + 1 < c.size(); ++j) {
        double K0 = std::exp(ks[j - 1]), K1 = std::exp(ks[j]), K2 = std::exp(ks[j + 1]);
        double s01 = (c[j] - c[j - 1]) / (K1 - K0), s12 = (c[j + 1] - c[j]) / (K2 - K1);
        CHECK(s12 > s01);
    }
    for (std::size_t j = 0; j < c.size(); ++j) {
        double K = std::exp(ks[j]);
        CHECK(c[j] >= std::max(1.0 - K, 0.0));
        CHECK(c[j] <= 1.0);
    }
}

TEST_CASE("call slope matches the digital") {
    CharFnRequest rq{geometric_rule(0.1, 1.0, 8), preset_sec52(), 1.0, 64};
    for (double K : {0.9, 1.0, 1.1}) {
        const double dk = 1e-3;
        double c0 = fourier_price(rq, {Payoff::Call, K}, 2.0, 1e-5).price;
        double c1 = fourier_price(rq, {Payoff::Call, K + dk}, 2.0, 1e-5).price;
        double d = fourier_price(rq, {Payoff::Digital, K + 0.5 * dk}, 0.5, 1e-4).price;
        CHECK(std::abs((c0 - c1) / dk / d - 1.0) < 1e-2);
    }
}

TEST_CASE("no leverage means no skew") {
    HestonParams p = preset_sec54();
    p.nu = 0.0;
    CharFnRequest rq{KernelSpec(0.1, 1.0), p, 1.0, 64};
    for (auto [T, s] : skew(rq, {0.05, 0.5}, 1e-4)) CHECK(std::abs(s) < 1e-5);
}

TEST_CASE("Markovian skew stays bounded at short maturity") {
    CharFnRequest rq{QuadratureRule({1.0}, {1.0}), preset_sec54(), 1.0, 64};
    auto sk = skew(rq, {0.002, 0.004, 0.008}, 1e-4);
    for (auto [T, s] : sk) CHECK(s < 0.0);
    // ODE model: skew tends to a finite limit, unlike T^(H-1/2)
    CHECK(std::abs(sk[0].second / sk[2].second - 1.0) < 0.1);
}

TEST_CASE("rule horizon and error summary") {
    CHECK(rule_horizon(0.04, 1.0, 1) == doctest::Approx(std::pow(0.04, 0.6)));
    CHECK(rule_horizon(0.04, 1.0, 2) == doctest::Approx(0.2));
    CHECK(rule_horizon(0.04, 1.0, 7) == doctest::Approx(1.0));
    CHECK(rule_horizon(0.04, 1.0, 64) == doctest::Approx(1.0));
    CHECK_THROWS_AS(rule_horizon(1.0, 0.5, 3), DomainError);
    CHECK(max_relative_error({{1.1, 2.0}}, {{1.0, 2.0}}) == doctest::Approx(0.1));
}
