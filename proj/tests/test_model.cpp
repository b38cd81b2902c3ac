#include "degsde/error.hpp"
#include "degsde/model.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace degsde;
using namespace degsde::model;
using Catch::Approx;

TEST_CASE("modulus families evaluate their closed forms", "[model]") {
    REQUIRE(Modulus::power(2.0, 0.5)(0.25) == Approx(1.0));
    const auto lp = Modulus::log_power(1.0, 1.0);
    const double c = std::exp(2.0 * 2.0 + 1.0);
    REQUIRE(lp.c() == Approx(c));
    REQUIRE(lp(1e-3) == Approx(1.0 / std::pow(std::log(c + 1e3), 2.0)));
    const auto ls = Modulus::log_sqrt(1.0);
    REQUIRE(ls(0.5) == Approx(1.0 / std::sqrt(std::log(std::exp(2.0) + 2.0))));
    REQUIRE(Modulus::power(1.0, 0.5)(0.0) == 0.0);
}

TEST_CASE("table modulus interpolates between nodes", "[model]") {
    auto t = Modulus::table({0.1, 0.2, 0.4}, {1.0, 2.0, 3.0});
    REQUIRE(t(0.15) == Approx(1.5));
    REQUIRE(t(1.0) == Approx(3.0));
    REQUIRE_THROWS_AS(Modulus::table({0.2, 0.1}, {1.0, 2.0}), InvalidModulus);
}

TEST_CASE("dini integral of a power modulus", "[model]") {
    // int_lo^1 K s^{a-1} ds = K (1 - lo^a) / a
    const double K = 1.5, a = 0.3, lo = 1e-8;
    REQUIRE(dini_integral(Modulus::power(K, a), lo) == Approx(K * (1 - std::pow(lo, a)) / a).epsilon(1e-10));
}

TEST_CASE("classification separates Dini from non-Dini moduli", "[model]") {
    auto p = classify_modulus(Modulus::power(1.0, 0.5), 1e-12);
    REQUIRE(p.dini_finite);
    REQUIRE(p.in_D0);
    auto lp = classify_modulus(Modulus::log_power(1.0, 1.0), 1e-12);
    REQUIRE(lp.in_D0);
    REQUIRE(lp.in_D1);
    auto ls = classify_modulus(Modulus::log_sqrt(1.0), 1e-12);
    REQUIRE_FALSE(ls.dini_finite);
    REQUIRE(ls.in_D0);
    REQUIRE_FALSE(ls.in_D1);
}

TEST_CASE("phi^2 of the default log-power modulus is concave", "[model]") {
    REQUIRE(phi_squared_concavity_slack(Modulus::log_power(1.0, 1.0)) > -1e-12);
    REQUIRE(phi_squared_concavity_slack(Modulus::power(1.0, 0.5)) > -1e-12);
}

TEST_CASE("Dirichlet eigenvalues on the unit interval and square", "[model]") {
    const double pi2 = std::numbers::pi * std::numbers::pi;
    auto e1 = dirichlet_eigenvalues(1, 4);
    REQUIRE(e1.size() == 4);
    for (int i = 0; i < 4; ++i) REQUIRE(e1[i] == Approx(pi2 * (i + 1) * (i + 1)));
    auto e2 = dirichlet_eigenvalues(2, 4);
    REQUIRE(e2[0] == Approx(2 * pi2));
    REQUIRE(e2[1] == Approx(5 * pi2));
    REQUIRE(e2[2] == Approx(5 * pi2));
    REQUIRE(e2[3] == Approx(8 * pi2));
}

TEST_CASE("wave example has the Dirichlet spectrum and passes the hypotheses", "[model]") {
    ExampleParams p;
    p.n_modes = 4;
    auto ex = build_example("wave", p);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    REQUIRE(ex.model.is_spectral());
    auto lam = ex.model.eigenvalues();
    for (int i = 0; i < 4; ++i) REQUIRE(lam(i) == Approx(pi2 * (i + 1) * (i + 1)));
    REQUIRE(validate_hypotheses(ex.model).all_pass());
}

TEST_CASE("wave example rejects theta <= d/2 citing H3", "[model]") {
    ExampleParams p;
    p.theta = 0.4;
    try {
        build_example("wave", p);
        FAIL("expected a hypothesis violation");
    } catch (const HypothesisViolation& e) {
        REQUIRE(e.label() == "H3");
    }
}

TEST_CASE("kinetic example passes, degenerate noise fails H1", "[model]") {
    ExampleParams p;
    REQUIRE(validate_hypotheses(build_example("kinetic", p).model).all_pass());
    auto M = build_example("kinetic", p).model;
    M.sigma = Mat::Zero(1, 1);
    REQUIRE_FALSE(validate_hypotheses(M).get("H1").pass);
    p.sigma = M.sigma;
    try {
        build_example("kinetic", p);
        FAIL("expected a hypothesis violation");
    } catch (const HypothesisViolation& e) {
        REQUIRE(e.label() == "H1");
    }
}

TEST_CASE("intertwining holds for the second-order example", "[model]") {
    ExampleParams p;
    p.dim = 2;
    auto ex = build_example("second_order", p);
    for (double t : {0.1, 0.5, 1.0}) REQUIRE(intertwining_residual(ex.model, t) < 1e-12);
}

TEST_CASE("built-in drifts satisfy their declared regularity", "[model][property]") {
    for (const auto& fam : {"rough", "rough_y", "sine_x", "steep_tanh", "power_y", "dissipative", "profile"}) {
        INFO(fam);
        auto b = make_drift(fam, 1, 1);
        REQUIRE(validate_drift_regularity(b, 1.0, 4000, 17) <= 1e-12);
    }
}

TEST_CASE("drift families are listed and unknown ones rejected", "[model]") {
    auto f = drift_families();
    REQUIRE(f.size() == 9);
    REQUIRE_THROWS_AS(make_drift("nope", 1, 1), DomainError);
    auto c = make_drift("constant", 1, 2);
    Vec z = Vec::Zero(3);
    REQUIRE(c(0.0, z).isApprox(Vec::Ones(2)));
}
