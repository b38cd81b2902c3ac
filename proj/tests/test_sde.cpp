#include "degsde/error.hpp"
#include "degsde/linear_flow.hpp"
#include "degsde/sde.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace degsde;
using namespace degsde::sde;
using Catch::Approx;

namespace {

model::SpectralModel kinetic() { return model::build_example("kinetic", {}).model; }

}  // namespace

TEST_CASE("coarsened noise sums the fine increments", "[sde]") {
    auto M = kinetic();
    auto fine = NoiseRecord::draw(M, 0.0, 1.0, 8, 5, 2);
    auto coarse = fine.coarsen(M, 2);
    REQUIRE(coarse.n_steps == 4);
    const Mat F = linear_flow::flow_matrix(M, fine.h());
    for (int i = 0; i < 4; ++i) {
        REQUIRE(coarse.dW_at(i)[0] == Approx(fine.dW_at(2 * i)[0] + fine.dW_at(2 * i + 1)[0]));
        Vec e1 = Eigen::Map<const Vec>(fine.eta_at(2 * i), 2), e2 = Eigen::Map<const Vec>(fine.eta_at(2 * i + 1), 2);
        Vec e = Eigen::Map<const Vec>(coarse.eta_at(i), 2);
        REQUIRE((e - (F * e1 + e2)).norm() < 1e-14);
    }
    REQUIRE_THROWS(fine.coarsen(M, 3));
}

TEST_CASE("zero drift is integrated exactly at every resolution", "[sde][property]") {
    auto M = kinetic();
    auto zero = model::make_drift("zero", 1, 1);
    Vec z0(2);
    z0 << 0.3, -0.4;
    auto noise = NoiseRecord::draw(M, 0.0, 1.0, 64, 1, 0);
    auto fine = integrate_mild(M, zero, z0, noise);
    auto coarse = integrate_mild(M, zero, z0, noise.coarsen(M, 16));
    REQUIRE((fine.state(64) - coarse.state(4)).norm() < 1e-12);
}

TEST_CASE("mild trajectories follow the Gaussian law without drift", "[sde][property]") {
    auto M = kinetic();
    auto zero = model::make_drift("zero", 1, 1);
    Vec z0(2);
    z0 << 1.0, 0.5;
    auto law = linear_flow::transition_law(M, 0, 1, z0);
    const int n = 4000;
    Vec mean = Vec::Zero(2);
    for (int p = 0; p < n; ++p) mean += integrate_mild(M, zero, z0, NoiseRecord::draw(M, 0, 1, 4, 3, p)).state(4);
    mean /= n;
    for (int i = 0; i < 2; ++i) REQUIRE(std::abs(mean(i) - law.mean(i)) < 5 * std::sqrt(law.cov(i, i) / n));
}

TEST_CASE("exponential Euler converges for a smooth drift", "[sde]") {
    auto M = kinetic();
    auto b = model::make_drift("sine_x", 1, 1);
    Vec z0 = Vec::Zero(2);
    auto ref_noise = NoiseRecord::draw(M, 0, 1, 1024, 6, 0);
    const Vec ref = integrate_mild(M, b, z0, ref_noise).state(1024);
    std::vector<double> err;
    for (int f : {64, 32, 16}) {
        auto tr = integrate_mild(M, b, z0, ref_noise.coarsen(M, f));
        err.push_back((tr.state(tr.n_steps()) - ref).norm());
    }
    // err runs from the coarsest grid to the finest.
    REQUIRE(err[1] < err[0]);
    REQUIRE(err[2] < err[1]);
}

TEST_CASE("blow-ups are recorded, not thrown", "[sde]") {
    auto M = kinetic();
    model::DriftSpec b = model::make_drift("zero", 1, 1);
    b.eval = [](double, const Vec&, const Vec& y) { return Vec::Constant(1, y(0) * y(0)); };
    Vec z0(2);
    z0 << 0.0, 5.0;
    auto tr = integrate_mild(M, b, z0, 1.0, 4096, 2);
    REQUIRE(tr.blew_up);
    REQUIRE(tr.blowup_time.has_value());
    REQUIRE(*tr.blowup_time < 0.5);
}

TEST_CASE("cutoff profile", "[sde]") {
    REQUIRE(cutoff_psi(0.0) == 1.0);
    REQUIRE(cutoff_psi(1.0) == 1.0);
    REQUIRE(cutoff_psi(2.0) == 0.0);
    REQUIRE(cutoff_psi(7.0) == 0.0);
    for (double r = 1.0; r < 2.0; r += 0.01) REQUIRE(cutoff_psi(r + 0.01) <= cutoff_psi(r));
    auto b = cutoff_drift(model::make_drift("constant", 1, 1), 1.0);
    Vec far(2);
    far << 3.0, 0.0;
    REQUIRE(b(0.0, far)(0) == 0.0);
    REQUIRE(b(0.0, Vec::Zero(2))(0) == 1.0);
}

TEST_CASE("common-noise gap is exactly zero without perturbation", "[sde]") {
    model::ExampleParams p;
    p.drift = "rough";
    auto ex = model::build_example("kinetic", p);
    auto rows = uniqueness_experiment(ex.model, ex.drift, Vec::Zero(2), 0.0, 1.0, {64, 256}, 4);
    for (const auto& r : rows) {
        REQUIRE(r.sup_gap == 0.0);
        REQUIRE(r.terminal_gap == 0.0);
    }
}

TEST_CASE("common-noise gap shrinks with the initial perturbation", "[sde]") {
    model::ExampleParams p;
    p.drift = "rough";
    auto ex = model::build_example("kinetic", p);
    double prev = INFINITY;
    for (double e : {1e-2, 1e-3, 1e-4}) {
        auto rows = uniqueness_experiment(ex.model, ex.drift, Vec::Zero(2), e, 1.0, {256, 1024}, 4);
        REQUIRE(rows.back().terminal_gap < prev);
        prev = rows.back().terminal_gap;
    }
}

TEST_CASE("representation residual for a constant drift", "[sde]") {
    auto M = kinetic();
    auto b = model::make_drift("constant", 1, 1);
    auto u = regularization::AnalyticField::constant_drift(Vec::Ones(1), 16, 1.0);
    auto sw = residual_sweep(M, b, Vec::Zero(2), u, 16, 1.0, {64, 128, 256}, 8, 3);
    REQUIRE(sw.ratios.size() == 2);
    for (double r : sw.ratios) REQUIRE(r > 1.3);
}

TEST_CASE("paths leaving the field box raise a coverage error", "[sde]") {
    auto M = kinetic();
    auto b = model::make_drift("rough_y", 1, 1);
    regularization::GridSpec g;
    g.axes = {1};
    g.nodes = {regularization::uniform_nodes(-0.05, 0.05, 5)};
    g.times = regularization::uniform_nodes(0, 1, 3);
    regularization::FieldGrid f(1, 1, g);
    auto tr = integrate_mild(M, b, Vec::Zero(2), 1.0, 64, 1);
    REQUIRE_THROWS_AS(representation_residual(M, tr, f, 16, &f), CoverageError);
}

TEST_CASE("Bihari curve for constant and linear growth", "[sde]") {
    const double eta = 0.7, C = 1.5, L = 2.0;
    auto c1 = bihari_bound([L](double) { return L; }, eta, 1.0, C, 9);
    for (std::size_t j = 0; j < c1.t.size(); ++j) REQUIRE(c1.bound[j] == Approx(eta + 2 * L * c1.t[j]).epsilon(1e-9));
    auto c2 = bihari_bound([](double r) { return r; }, eta, 1.0, C, 9);
    for (std::size_t j = 0; j < c2.t.size(); ++j)
        REQUIRE(1 + c2.bound[j] == Approx((1 + eta) * std::exp(2 * C * c2.t[j])).epsilon(1e-9));
    REQUIRE_FALSE(c2.non_osgood_warning);
}

TEST_CASE("superlinear growth triggers the non-Osgood warning", "[sde]") {
    auto c = bihari_bound([](double r) { return 1 + r * r; }, 0.5, 1.0, 2.0, 9);
    REQUIRE(c.non_osgood_warning);
    REQUIRE_FALSE(c.warning.empty());
}

TEST_CASE("dissipative paths stay inside the envelope", "[sde]") {
    model::ExampleParams p;
    p.drift = "dissipative";
    auto ex = model::build_example("kinetic", p);
    Vec z0 = Vec::Constant(2, 0.5);
    auto rep = envelope_experiment(ex.model, ex.drift, z0, 1.0, 128, 50, 9);
    REQUIRE(rep.blowups == 0);
    REQUIRE(rep.all_below);
    REQUIRE(rep.worst_ratio <= 1.0);
}
