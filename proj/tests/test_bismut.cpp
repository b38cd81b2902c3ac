#include "degsde/bismut.hpp"
#include "degsde/linear_flow.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace degsde;
using namespace degsde::bismut;
using Catch::Approx;

namespace {

model::SpectralModel kinetic() { return model::build_example("kinetic", {}).model; }

// A1 = -A0 with A0 a rotation generator, A2 = 0: the intertwining holds and A0 is not symmetric.
model::SpectralModel rotating() {
    model::ExampleParams p;
    Mat J(2, 2);
    J << 0, 1, -1, 0;
    p.A0 = J;
    p.A1 = -J;
    p.A2 = Mat::Zero(2, 2);
    p.B = Mat::Identity(2, 2);
    p.sigma = Mat::Identity(2, 2);
    return model::build_example("kinetic", p).model;
}

}  // namespace

TEST_CASE("scalar kinetic Gramian inverse scales like 6 / t^3", "[bismut]") {
    auto g = gramian_bound_check(kinetic());
    REQUIRE(g.t.size() == 7);
    for (double v : g.scaled) REQUIRE(std::abs(v - 6.0) < 6e-9);
}

TEST_CASE("Gramian against its defining integral", "[bismut]") {
    // Kinetic scalar: Q_t = int_0^t u (t-u) du = t^3/6.
    for (double t : {0.01, 0.3, 2.0}) REQUIRE(gramian_Q(kinetic(), t).Q(0, 0) == Approx(t * t * t / 6));
}

TEST_CASE("controls bring the perturbed flow back at T", "[bismut]") {
    auto M = kinetic();
    for (const Vec& v : {Vec(Vec::Unit(2, 0)), Vec(Vec::Unit(2, 1)), Vec(Vec::Ones(2))}) {
        auto c = perturbation_controls(M, 0.2, 1.0, v);
        REQUIRE((coupling_gap(M, c, 0.2) - v).norm() < 1e-12);
        REQUIRE(coupling_gap(M, c, 1.0).norm() < 1e-8);
    }
}

TEST_CASE("weighted gradients match Gaussian derivatives", "[bismut]") {
    auto M = kinetic();
    Vec z(2);
    z << 0.5, -0.3;
    const Mat F = linear_flow::flow_matrix(M, 1.0);
    const Vec mu = F * z;
    std::vector<Observable> fs = {[](const Vec& v) { return v(0); }, [](const Vec& v) { return v(1) * v(1); },
                                  [](const Vec& v) { return v(0) * v(1); }};
    std::vector<Vec> vs = {Vec::Unit(2, 0), Vec::Unit(2, 1)};
    auto est = bismut_gradient_batch(M, 0.0, 1.0, fs, z, vs, 20000, 32, 5);
    for (std::size_t j = 0; j < vs.size(); ++j) {
        const Vec a = F * vs[j];
        const double exact[] = {a(0), 2 * mu(1) * a(1), a(0) * mu(1) + mu(0) * a(1)};
        for (std::size_t i = 0; i < fs.size(); ++i) {
            INFO("f" << i << " v" << j);
            REQUIRE(std::abs(est[i][j].value - exact[i]) < 5 * est[i][j].stderr_);
        }
    }
}

TEST_CASE("single and batched gradients agree on the same seed", "[bismut]") {
    auto M = kinetic();
    Observable f = [](const Vec& v) { return std::sin(v(0)); };
    Vec z = Vec::Zero(2);
    auto one = bismut_gradient(M, 0, 1, f, z, Vec::Unit(2, 0), 3000, 16, 4);
    auto batch = bismut_gradient_batch(M, 0, 1, {f}, z, {Vec::Unit(2, 0)}, 3000, 16, 4);
    REQUIRE(one.value == batch[0][0].value);
}

TEST_CASE("gradient against a finite difference of the Gaussian expectation", "[bismut]") {
    auto M = kinetic();
    Observable f = [](const Vec& v) { return std::tanh(v(0)); };
    Vec z(2);
    z << 0.2, 0.1;
    const double h = 1e-5;
    const Vec e = Vec::Unit(2, 1);
    const double fd = (linear_flow::apply_P0(M, 0, 1, f, z + h * e, linear_flow::P0Method::gauss_hermite, {40}).value -
                       linear_flow::apply_P0(M, 0, 1, f, z - h * e, linear_flow::P0Method::gauss_hermite, {40}).value) /
                      (2 * h);
    auto est = bismut_gradient(M, 0, 1, f, z, e, 40000, 32, 12);
    REQUIRE(std::abs(est.value - fd) < 5 * est.stderr_);
}

TEST_CASE("second derivative of a quadratic", "[bismut]") {
    auto M = kinetic();
    Vec z(2);
    z << 0.1, 0.2;
    Observable f = [](const Vec& v) { return v(0) * v(1); };
    // d^2/dx dy E[X Y] = (F e_x)_0 (F e_y)_1 + (F e_y)_0 (F e_x)_1 = 1
    auto est = bismut_hessian(M, 0, 1, f, z, Vec::Unit(2, 0), Vec::Unit(2, 1), 40000, 32, 8);
    REQUIRE(std::abs(est.value - 1.0) < 5 * est.stderr_);
}

TEST_CASE("Girsanov density has mean one", "[bismut]") {
    auto r = verify_coupling(kinetic(), 0, 1, Vec::Unit(2, 0), 0.1, 20000, 32, 2);
    REQUIRE(r.terminal_gap < 1e-8);
    REQUIRE(std::abs(r.girsanov_mean.value - 1.0) < 5 * r.girsanov_mean.stderr_);
}

TEST_CASE("weight energy follows the variance bound", "[bismut][property]") {
    // Pure directions scale exactly like the bound in the scalar kinetic model.
    for (int i = 0; i < 2; ++i) {
        auto vb = variance_bound_check(kinetic(), 0, 1, Vec::Unit(2, i));
        REQUIRE(vb.ratios.size() == 7);
        for (double r : vb.ratios) REQUIRE(r == Approx(vb.ratios.front()).epsilon(1e-6));
    }
    auto mixed = variance_bound_check(kinetic(), 0, 1, Vec::Ones(2));
    REQUIRE(mixed.sup < 100);
}

TEST_CASE("terminal coincidence with a nonsymmetric A0", "[bismut]") {
    auto M = rotating();
    Vec v(4);
    v << 0.3, -1.0, 0.5, 2.0;
    auto c = perturbation_controls(M, 0.2, 1.1, v);
    REQUIRE(coupling_gap(M, c, 0.2).isApprox(v, 1e-10));
    REQUIRE(coupling_gap(M, c, 1.1).norm() < 1e-8);
    REQUIRE(coupling_gap(M, c, 0.7).norm() > 1e-3);
}

TEST_CASE("probe points", "[bismut]") {
    auto p = probe_points(2, 8);
    REQUIRE(p.size() == 8);
    REQUIRE(p[0].norm() == 0.0);
    for (const auto& z : p) REQUIRE(z.norm() <= 2.0);
}

TEST_CASE("gradient scaling exponents at a reduced budget", "[bismut]") {
    Observable f = [](const Vec& v) { return v(0) > 0 ? 1.0 : (v(0) < 0 ? -1.0 : 0.0); };
    std::vector<double> gaps;
    for (int j = 8; j >= 3; --j) gaps.push_back(std::ldexp(1.0, -j));
    ScalingBudget b{4000, 32, 3};
    REQUIRE(std::abs(scaling_exponent(kinetic(), f, Component::x, gaps, b).slope + 1.5) < 0.2);
    REQUIRE(std::abs(scaling_exponent(kinetic(), f, Component::y, gaps, b).slope + 0.5) < 0.2);
}
