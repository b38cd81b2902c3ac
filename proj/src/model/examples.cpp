#include "degsde/error.hpp"
#include "degsde/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace degsde::model {

std::vector<double> dirichlet_eigenvalues(int d_space, int n) {
    if (d_space < 1 || d_space > 3) throw CapabilityError("dirichlet_eigenvalues: d_space must be 1, 2 or 3");
    if (n < 1) throw DomainError("dirichlet_eigenvalues: n must be >= 1");
    const double pi2 = std::numbers::pi * std::numbers::pi;
    std::vector<double> out;
    if (d_space == 1) {
        for (int i = 1; i <= n; ++i) out.push_back(pi2 * i * i);
        return out;
    }
    // Index range n per axis contains the n smallest sums of squares.
    for (int a = 1; a <= n; ++a)
        for (int b = 1; b <= n; ++b) {
            if (d_space == 2) {
                out.push_back(pi2 * (a * a + b * b));
            } else {
                for (int c = 1; c <= n; ++c) out.push_back(pi2 * (a * a + b * b + c * c));
            }
        }
    std::sort(out.begin(), out.end());
    out.resize(n);
    return out;
}

namespace {

double unit_ball_volume(int d) {
    switch (d) {
        case 1: return 2.0;
        case 2: return std::numbers::pi;
        default: return 4.0 * std::numbers::pi / 3.0;
    }
}

Example build_wave(const ExampleParams& p) {
    const int ds = p.d_space;
    if (!(p.theta > ds / 2.0))
        throw HypothesisViolation("H3", "wave example requires theta > d_space/2 (theta = " +
                                            std::to_string(p.theta) + ", d_space = " + std::to_string(ds) + ")");
    double delta_max = 1.0 - ds / (2.0 * p.theta);
    double delta = p.delta.value_or(0.5 * delta_max);
    if (!(delta > 0) || !(delta < delta_max))
        throw HypothesisViolation("H3", "delta must lie in (0, 1 - d_space/(2 theta))");
    const int n = p.n_modes;
    std::vector<double> mu = dirichlet_eigenvalues(ds, n);
    Vec lam(n);
    for (int i = 0; i < n; ++i) lam(i) = std::pow(mu[i], p.theta);

    SpectralModel M;
    M.kind = ModelKind::wave;
    M.A1 = -lam.asDiagonal().toDenseMatrix();
    M.A2 = M.A1;
    M.B = Mat::Identity(n, n);
    M.A0 = Mat::Zero(n, n);
    M.sigma = Mat::Identity(n, n);
    M.delta = delta;
    // Weyl asymptotics mu_i ~ (2 pi)^2 (i / omega_d)^{2/d}; exact for d = 1.
    double base = 4.0 * std::numbers::pi * std::numbers::pi * std::pow(unit_ball_volume(ds), -2.0 / ds);
    M.tail = TailRule{std::pow(base, p.theta), 2.0 * p.theta / ds};
    require_hypotheses(M);

    Example ex{M, make_drift(p.drift, n, n, p.drift_params)};
    return ex;
}

Example build_kinetic(const ExampleParams& p) {
    const int dim = p.dim;
    SpectralModel M;
    M.kind = ModelKind::kinetic;
    M.A2 = p.A2.value_or(Mat::Zero(dim, dim));
    const int d = static_cast<int>(M.A2.rows());
    M.B = p.B.value_or(Mat::Identity(d, d));
    const int m = static_cast<int>(M.B.rows());
    M.A1 = p.A1.value_or(Mat::Zero(m, m));
    M.A0 = p.A0.value_or(Mat::Zero(m, m));
    M.sigma = p.sigma.value_or(Mat::Identity(d, d));
    if (p.delta) M.delta = *p.delta;
    require_hypotheses(M);
    return Example{M, make_drift(p.drift, m, d, p.drift_params)};
}

Example build_second_order(const ExampleParams& p) {
    // dX = (AX + Y) dt, dY = b dt + sigma dW, rewritten with A1 = A, A2 = I and
    // drift b - y; the intertwining then holds with A0 = I - A.
    const int dim = p.dim;
    SpectralModel M;
    M.kind = ModelKind::second_order;
    M.A1 = p.A1.value_or(Mat::Zero(dim, dim));
    M.A2 = Mat::Identity(dim, dim);
    M.B = Mat::Identity(dim, dim);
    M.A0 = Mat::Identity(dim, dim) - M.A1;
    M.sigma = p.sigma.value_or(Mat::Identity(dim, dim));
    if (p.delta) M.delta = *p.delta;
    require_hypotheses(M);

    DriftSpec base = make_drift(p.drift, dim, dim, p.drift_params);
    DriftSpec b = base;
    b.name = "second_order:" + base.name;
    DriftFn inner = base.eval;
    b.eval = [inner](double t, const Vec& x, const Vec& y) { return (inner(t, x, y) - y).eval(); };
    b.y_lipschitz = base.y_lipschitz + 1.0;
    b.sup_norm.reset();
    return Example{M, b};
}

}  // namespace

Example build_example(const std::string& kind, const ExampleParams& params) {
    if (kind == "wave") return build_wave(params);
    if (kind == "kinetic") return build_kinetic(params);
    if (kind == "second_order") return build_second_order(params);
    throw DomainError("unknown example kind '" + kind + "'");
}

}  // namespace degsde::model
