#include "degsde/error.hpp"
#include "degsde/regularization.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace degsde;
using namespace degsde::regularization;
using Catch::Approx;

namespace {

model::SpectralModel kinetic() { return model::build_example("kinetic", {}).model; }

GridSpec y_grid(int points, int times, double lo = -3, double hi = 3) {
    GridSpec g;
    g.axes = {1};
    g.nodes = {uniform_nodes(lo, hi, points)};
    g.times = uniform_nodes(0.0, 1.0, times);
    return g;
}

}  // namespace

TEST_CASE("node builders", "[regularization]") {
    auto u = uniform_nodes(-1, 1, 5);
    REQUIRE(u == std::vector<double>{-1, -0.5, 0, 0.5, 1});
    auto g = graded_nodes(-4, 4, 0.0, 0.01, 1.1);
    REQUIRE(g.front() == -4);
    REQUIRE(g.back() == 4);
    for (std::size_t i = 1; i < g.size(); ++i) REQUIRE(g[i] > g[i - 1]);
    double smallest = INFINITY;
    for (std::size_t i = 1; i < g.size(); ++i) smallest = std::min(smallest, g[i] - g[i - 1]);
    REQUIRE(smallest <= 0.0101);
}

TEST_CASE("multilinear interpolation is exact for affine fields", "[regularization][property]") {
    auto spec = GridSpec::uniform({0, 1}, -2, 2, 9, 1.0, 5);
    FieldGrid f(1, 1, spec);
    auto& v = f.mutable_values();
    for (std::size_t it = 0; it < f.n_times(); ++it)
        for (std::size_t ip = 0; ip < f.n_points(); ++ip) {
            Vec z = f.node_state(ip);
            v[it * f.n_points() + ip] = 0.3 + 0.5 * z(0) - 0.25 * z(1) + spec.times[it];
        }
    Vec z(2);
    z << 0.37, -1.11;
    REQUIRE(f.value(0.61, z)(0) == Approx(0.3 + 0.5 * 0.37 + 0.25 * 1.11 + 0.61));
    REQUIRE(f.grad2(0.61, z)(0, 0) == Approx(-0.25));
    REQUIRE(f.grad2_bound() == Approx(0.25));
    REQUIRE(f.contains(z));
    z << 3.0, 0.0;
    REQUIRE_FALSE(f.contains(z));
}

TEST_CASE("declared bounds are enforced", "[regularization]") {
    FieldGrid f(1, 1, y_grid(5, 3));
    f.mutable_values()[2] = 5.0;
    f.declared_bound = 1.0;
    REQUIRE_THROWS_AS(f.check_invariants(), NumericalError);
}

TEST_CASE("resolvent of constant and affine integrands", "[regularization]") {
    auto M = kinetic();
    const double lam = 8.0, s = 0.25, T = 1.0, h = T - s;
    Vec z(2);
    z << 0.4, -0.7;
    auto c = resolvent_apply(M, lam, [](double, const Vec&) { return Vec::Constant(1, 2.0); }, s, T, z);
    REQUIRE(c.value(0) == Approx(2.0 * (1 - std::exp(-lam * h)) / lam).epsilon(1e-10));
    // E x_r = x + y (r - s); int_0^h e^{-lam u} (x + y u) du by parts.
    auto a = resolvent_apply(M, lam, [](double, const Vec& w) { return Vec::Constant(1, w(0)); }, s, T, z);
    const double e = std::exp(-lam * h);
    const double I0 = (1 - e) / lam, I1 = (1 - e) / (lam * lam) - h * e / lam;
    REQUIRE(a.value(0) == Approx(z(0) * I0 + z(1) * I1).epsilon(1e-10));
}

TEST_CASE("Picard iteration reproduces the constant-drift solution", "[regularization]") {
    auto M = kinetic();
    const double lam = 16.0;
    auto b = model::make_drift("constant", 1, 1);
    auto r = picard_solve(M, b, lam, y_grid(9, 17), 1e-12, 40);
    auto exact = AnalyticField::constant_drift(Vec::Ones(1), lam, 1.0);
    for (std::size_t it = 0; it < r.field.n_times(); ++it)
        for (std::size_t ip = 0; ip < r.field.n_points(); ++ip) {
            const double s = r.field.spec().times[it];
            REQUIRE(std::abs(r.field.at(it, ip, 0) - exact.value(s, r.field.node_state(ip))(0)) < 1e-8);
        }
    REQUIRE(r.report.converged);
}

TEST_CASE("Picard contraction factors at a large lambda", "[regularization]") {
    auto M = kinetic();
    auto b = model::make_drift("steep_tanh", 1, 1);
    auto r = picard_solve(M, b, 64.0, y_grid(41, 9), 1e-10, 40);
    REQUIRE(r.report.converged);
    for (double f : r.report.factors) REQUIRE(f <= 0.5);
    // sup|u| <= sup|b| (1 - e^{-lam T}) / lam plus the gradient term
    REQUIRE(r.report.sup_u < 1.0);
}

TEST_CASE("lambda search returns a contracting lambda", "[regularization]") {
    auto M = kinetic();
    model::DriftParams p;
    p.amplitude = 4.0;
    auto b = model::make_drift("steep_tanh", 1, 1, p);
    auto s = find_lambda(M, b, y_grid(41, 9), 1e-8, 30, 1.0);
    REQUIRE(s.lambda >= 1.0);
    REQUIRE(s.tried.back() == s.lambda);
    for (std::size_t i = 0; i < std::min<std::size_t>(3, s.result.report.factors.size()); ++i)
        REQUIRE(s.result.report.factors[i] <= 0.5);
}

TEST_CASE("grids must be closed under the linear flow", "[regularization]") {
    GridSpec g;
    g.axes = {0};
    g.nodes = {uniform_nodes(-1, 1, 5)};
    g.times = uniform_nodes(0, 1, 3);
    REQUIRE_THROWS_AS(picard_solve(kinetic(), model::make_drift("zero", 1, 1), 16, g), CapabilityError);
}

TEST_CASE("transform round trip when the gradient bound is below one", "[regularization][property]") {
    auto M = kinetic();
    auto r = picard_solve(M, model::make_drift("steep_tanh", 1, 1), 32.0, y_grid(41, 9), 1e-10, 40);
    REQUIRE(r.field.grad2_bound() < 1.0);
    for (double y : {-2.5, -0.3, 0.0, 0.01, 1.7})
        for (double s : {0.0, 0.33, 1.0}) {
            Vec z(2);
            z << 0.2, y;
            Vec back = theta_inverse(r.field, s, theta_forward(r.field, s, z));
            REQUIRE((back - z).norm() <= 1e-9);
        }
}

TEST_CASE("transform refuses fields with gradient bound >= 1", "[regularization]") {
    AnalyticField f(
        1, [](double, const Vec& z) { return Vec::Constant(1, -1.5 * z(1)); },
        [](double, const Vec&) { return Mat::Constant(1, 1, -1.5); }, 1.5);
    REQUIRE_THROWS_AS(theta_inverse(f, 0.0, Vec::Zero(2)), NotInvertible);
}

TEST_CASE("Galerkin projection zeroes trailing drift components", "[regularization]") {
    auto b = model::make_drift("constant", 3, 3);
    auto p = project_drift(b, 2);
    Vec out = p(0.0, Vec::Zero(6));
    REQUIRE(out(0) == 1.0);
    REQUIRE(out(1) == 1.0);
    REQUIRE(out(2) == 0.0);
    REQUIRE_THROWS_AS(galerkin_compare(kinetic(), model::make_drift("zero", 1, 1), 16, 1, 1, y_grid(5, 3)),
                      CapabilityError);
}

TEST_CASE("Galerkin gaps shrink with the truncation level", "[regularization]") {
    model::ExampleParams p;
    p.n_modes = 6;
    p.drift = "profile";
    auto ex = model::build_example("wave", p);
    auto g = GridSpec::uniform({0, ex.model.m()}, -3, 3, 9, 1.0, 5);
    auto a = galerkin_compare(ex.model, ex.drift, 16, 1, 6, g, 1e-8, 30);
    auto b = galerkin_compare(ex.model, ex.drift, 16, 3, 6, g, 1e-8, 30);
    REQUIRE(b.value_gap < a.value_gap);
    REQUIRE(b.grad_gap < a.grad_gap);
}

TEST_CASE("gradient regularity ratio is finite", "[regularization]") {
    auto M = kinetic();
    auto r = picard_solve(M, model::make_drift("rough_y", 1, 1), 32.0, y_grid(41, 9), 1e-10, 40);
    const double h = holder_ratio(r.field, 0.0, model::Modulus::log_power(1.0, 1.0), 0.5, 200, 3);
    REQUIRE(std::isfinite(h));
    REQUIRE(h > 0);
}

TEST_CASE("returned field is a fixed point to the requested tolerance", "[regularization][property]") {
    auto r = picard_solve(kinetic(), model::make_drift("steep_tanh", 1, 1), 64.0, y_grid(41, 9), 1e-9, 60);
    REQUIRE(r.report.converged);
    REQUIRE(r.report.residuals.back() <= 1e-9);
}

TEST_CASE("gradient size does not grow along a doubling lambda sweep", "[regularization][property]") {
    auto M = kinetic();
    auto b = model::make_drift("steep_tanh", 1, 1);
    double prev = INFINITY;
    for (double lam = 16; lam <= 256; lam *= 2) {
        auto r = picard_solve(M, b, lam, y_grid(61, 9), 1e-9, 60);
        REQUIRE(r.report.sup_grad2 <= prev);
        prev = r.report.sup_grad2;
    }
}

TEST_CASE("Galerkin gaps shrink when lambda doubles", "[regularization][property]") {
    model::ExampleParams p;
    p.n_modes = 6;
    p.drift = "profile";
    auto ex = model::build_example("wave", p);
    auto g = GridSpec::uniform({0, ex.model.m()}, -3, 3, 9, 1.0, 5);
    auto a = galerkin_compare(ex.model, ex.drift, 16, 2, 6, g, 1e-8, 30);
    auto b = galerkin_compare(ex.model, ex.drift, 32, 2, 6, g, 1e-8, 30);
    REQUIRE(b.value_gap < a.value_gap);
}
