#include "degsde/error.hpp"
#include "degsde/linear_flow.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace degsde;
using namespace degsde::linear_flow;
using Catch::Approx;

namespace {

model::SpectralModel kinetic() { return model::build_example("kinetic", {}).model; }

model::SpectralModel single_mode() {
    model::ExampleParams p;
    p.A1 = Mat::Constant(1, 1, -1.0);
    p.A2 = Mat::Constant(1, 1, -1.0);
    return model::build_example("kinetic", p).model;
}

}  // namespace

TEST_CASE("kinetic flow matrix and covariance in closed form", "[linear_flow]") {
    auto M = kinetic();
    const double t = 0.7;
    Mat F = flow_matrix(M, t);
    REQUIRE(F(0, 0) == Approx(1.0));
    REQUIRE(F(0, 1) == Approx(t));
    REQUIRE(F(1, 0) == Approx(0.0).margin(1e-15));
    Mat C = covariance(M, 0.0, t);
    REQUIRE(C(0, 0) == Approx(t * t * t / 3));
    REQUIRE(C(0, 1) == Approx(t * t / 2));
    REQUIRE(C(1, 1) == Approx(t));
}

TEST_CASE("wave covariance Y-block is the scalar OU variance per mode", "[linear_flow]") {
    model::ExampleParams p;
    p.n_modes = 4;
    auto M = model::build_example("wave", p).model;
    Mat C = covariance(M, 0.0, 0.1);
    Vec lam = M.eigenvalues();
    for (int i = 0; i < 4; ++i) {
        const double v = (1 - std::exp(-2 * lam(i) * 0.1)) / (2 * lam(i));
        REQUIRE(C(4 + i, 4 + i) == Approx(v).epsilon(1e-12));
        for (int j = 0; j < 4; ++j)
            if (j != i) REQUIRE(std::abs(C(4 + i, 4 + j)) < 1e-15);
    }
}

TEST_CASE("covariance matches adaptive quadrature", "[linear_flow]") {
    for (auto M : {kinetic(), single_mode()}) {
        Mat a = covariance(M, 0.2, 1.1);
        Mat b = covariance_by_quadrature(M, 0.2, 1.1);
        REQUIRE((a - b).norm() < 1e-11);
    }
    model::ExampleParams p;
    p.dim = 2;
    auto M = model::build_example("second_order", p).model;
    REQUIRE((covariance(M, 0.0, 0.5) - covariance_by_quadrature(M, 0.0, 0.5)).norm() < 1e-11);
}

TEST_CASE("transition laws compose (Chapman-Kolmogorov)", "[linear_flow][property]") {
    auto M = single_mode();
    Vec z(2);
    z << 0.3, -1.2;
    auto direct = transition_law(M, 0.0, 1.0, z);
    auto half = transition_law(M, 0.0, 0.4, z);
    auto composed = push_forward(half, flow_matrix(M, 0.6), covariance(M, 0.4, 1.0));
    REQUIRE((direct.mean - composed.mean).norm() < 1e-12);
    REQUIRE((direct.cov - composed.cov).norm() < 1e-8);
}

TEST_CASE("covariance is symmetric positive semidefinite", "[linear_flow][property]") {
    model::ExampleParams p;
    p.n_modes = 6;
    auto M = model::build_example("wave", p).model;
    for (double t : {1e-3, 0.05, 1.0}) {
        Mat C = covariance(M, 0.0, t);
        REQUIRE((C - C.transpose()).norm() < 1e-14);
        Eigen::SelfAdjointEigenSolver<Mat> es(C);
        REQUIRE(es.eigenvalues().minCoeff() > -1e-14);
    }
}

TEST_CASE("exp_moment matches quadrature", "[linear_flow]") {
    for (int k = 0; k <= 2; ++k)
        for (double a : {0.0, 1e-9, 0.3, 40.0}) {
            double q = 0;
            const int n = 400000;
            const double h = 0.8;
            for (int i = 0; i < n; ++i) {
                const double u = (i + 0.5) * h / n;
                q += std::pow(u, k) * std::exp(-a * u) * h / n;
            }
            REQUIRE(exp_moment(k, a, h) == Approx(q).epsilon(1e-7));
        }
}

TEST_CASE("sampled moments agree with the transition law", "[linear_flow][property]") {
    auto M = kinetic();
    Vec z(2);
    z << 0.5, -0.5;
    auto b = sample_linear(M, 0.0, 1.0, z, 20000, 8, 42);
    auto law = transition_law(M, 0.0, 1.0, z);
    Vec mean = Vec::Zero(2);
    Mat second = Mat::Zero(2, 2);
    for (int p = 0; p < b.n_paths; ++p) {
        Vec x = b.terminal(p);
        mean += x;
        second += x * x.transpose();
    }
    mean /= b.n_paths;
    second /= b.n_paths;
    Mat cov = second - mean * mean.transpose();
    for (int i = 0; i < 2; ++i) {
        const double se = std::sqrt(law.cov(i, i) / b.n_paths);
        REQUIRE(std::abs(mean(i) - law.mean(i)) < 5 * se);
        // Var of a sample variance of a Gaussian is 2 sigma^4 / n.
        const double se2 = std::sqrt(2.0 / b.n_paths) * law.cov(i, i);
        REQUIRE(std::abs(cov(i, i) - law.cov(i, i)) < 5 * se2);
    }
}

TEST_CASE("sampling is reproducible and independent of block layout", "[linear_flow]") {
    auto M = kinetic();
    Vec z = Vec::Zero(2);
    auto a = sample_linear(M, 0.0, 1.0, z, 300, 4, 9);
    auto b = sample_linear(M, 0.0, 1.0, z, 300, 4, 9);
    REQUIRE(a.states == b.states);
    auto c = sample_linear(M, 0.0, 1.0, z, 256, 4, 9);
    for (int p = 0; p < 256; ++p) REQUIRE(c.terminal(p) == a.terminal(p));
}

TEST_CASE("apply_P0 reproduces means and constants", "[linear_flow]") {
    auto M = kinetic();
    Vec z(2);
    z << 0.0, 1.0;
    Observable x = [](const Vec& v) { return v(0); };
    Observable one = [](const Vec&) { return 1.0; };
    REQUIRE(apply_P0(M, 0, 1, x, z, P0Method::gauss_hermite).value == Approx(1.0));
    REQUIRE(apply_P0(M, 0, 1, one, z, P0Method::gauss_hermite).value == Approx(1.0));
    auto mc = apply_P0(M, 0, 1, x, z, P0Method::monte_carlo, {12, 20000, 3});
    REQUIRE(std::abs(mc.value - 1.0) < 5 * mc.stderr_);
}

TEST_CASE("apply_P0 satisfies the Markov property", "[linear_flow][property]") {
    auto M = single_mode();
    Vec z(2);
    z << 0.4, -0.2;
    Observable f = [](const Vec& v) { return std::cos(v(0)) + v(1) * v(1); };
    const double direct = apply_P0(M, 0, 1, f, z, P0Method::gauss_hermite).value;
    Observable inner = [&](const Vec& w) { return apply_P0(M, 0.5, 1, f, w, P0Method::gauss_hermite).value; };
    const double nested = apply_P0(M, 0, 0.5, inner, z, P0Method::gauss_hermite).value;
    REQUIRE(nested == Approx(direct).epsilon(1e-8));
}

TEST_CASE("flow matrix against a Taylor series", "[linear_flow]") {
    model::ExampleParams p;
    Mat J(2, 2);
    J << 0, 1, -1, 0;
    p.A0 = J;
    p.A1 = -J;
    p.A2 = Mat::Zero(2, 2);
    auto M = model::build_example("kinetic", p).model;
    const double h = 0.7;
    const Mat A = h * M.block_operator();
    Mat term = Mat::Identity(4, 4), sum = term;
    for (int k = 1; k < 40; ++k) {
        term = term * A / k;
        sum += term;
    }
    REQUIRE((flow_matrix(M, h) - sum).norm() < 1e-13);
}

TEST_CASE("Gauss-Hermite refuses large dimensions", "[linear_flow]") {
    model::ExampleParams p;
    p.n_modes = 4;
    auto M = model::build_example("wave", p).model;
    Observable f = [](const Vec& v) { return v(0); };
    REQUIRE_THROWS_AS(apply_P0(M, 0, 1, f, Vec::Zero(8), P0Method::gauss_hermite), CapabilityError);
}

TEST_CASE("noise integral of a single mode in closed form", "[linear_flow]") {
    auto r = hs_noise_integral(single_mode(), 0.0, 0.5);
    REQUIRE(std::abs(r.value - (1 - std::exp(-1.0)) / 2) < 1e-12);
    auto silent = single_mode();
    silent.sigma = Mat::Zero(1, 1);
    REQUIRE(hs_noise_integral(silent, 0.0, 0.5).value == 0.0);
}

TEST_CASE("wave noise integral stays below c2 (t-s)^delta", "[linear_flow][property]") {
    model::ExampleParams p;
    p.delta = 0.4;
    auto M = model::build_example("wave", p).model;
    for (int j = 3; j <= 8; ++j) {
        auto r = hs_noise_integral(M, 0.0, std::ldexp(1.0, -j));
        REQUIRE(r.value_with_tail <= r.bound);
        REQUIRE(r.exponent_check >= 0.4 - 0.05);
        REQUIRE(r.exponent_check <= 1.0);
    }
}

TEST_CASE("Hurwitz tail against direct summation", "[linear_flow]") {
    double direct = 0;
    for (long i = 5; i < 2000000; ++i) direct += std::pow(static_cast<double>(i), -3.0);
    direct += 0.5 / (2000000.0 * 2000000.0);
    REQUIRE(hurwitz_tail(3.0, 5) == Approx(direct).epsilon(1e-10));
}
