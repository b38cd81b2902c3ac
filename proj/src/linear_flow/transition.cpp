#include "degsde/error.hpp"
#include "degsde/linalg.hpp"
#include "degsde/linear_flow.hpp"
#include "degsde/quadrature.hpp"

#include <cmath>

namespace degsde::linear_flow {

namespace {

bool closed_form_applies(const SpectralModel& M) {
    return !M.time_dependent() && M.m() == M.d() && linalg::is_diagonal(M.A1) &&
           linalg::is_diagonal(M.B) && (M.A1 - M.A2).isZero(0.0);
}

// Modes decouple: y_i responds to noise with kernel e^{-a_i u}, x_i with
// beta_i u e^{-a_i u}.
Mat closed_form_cov(const SpectralModel& M, double h) {
    const int d = M.d();
    Mat S = M.sigma * M.sigma.transpose();
    Mat C = Mat::Zero(2 * d, 2 * d);
    Vec a = -M.A1.diagonal();
    Vec beta = M.B.diagonal();
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (S(i, j) == 0.0) continue;
            double ap = a(i) + a(j);
            C(d + i, d + j) = S(i, j) * exp_moment(0, ap, h);
            C(i, d + j) = beta(i) * S(i, j) * exp_moment(1, ap, h);
            C(i, j) = beta(i) * beta(j) * S(i, j) * exp_moment(2, ap, h);
        }
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) C(d + j, i) = C(i, d + j);
    return C;
}

}  // namespace

double exp_moment(int k, double a, double h) {
    if (k < 0 || k > 2) throw DomainError("exp_moment: k must be 0, 1 or 2");
    double x = a * h;
    if (std::abs(x) < 1.0) {
        // sum_n (-a)^n h^{n+k+1} / (n! (n+k+1))
        double term = std::pow(h, k + 1);
        double sum = 0.0;
        for (int n = 0; n < 60; ++n) {
            double add = term / (n + k + 1);
            sum += add;
            if (std::abs(add) < 1e-18 * std::abs(sum)) break;
            term *= -x / (n + 1);
        }
        return sum;
    }
    double e = std::exp(-x);
    switch (k) {
        case 0: return -std::expm1(-x) / a;
        case 1: return (1.0 - e * (1.0 + x)) / (a * a);
        default: return (2.0 - e * (2.0 + 2.0 * x + x * x)) / (a * a * a);
    }
}

Mat flow_matrix(const SpectralModel& model, double h) {
    return linalg::expm(h * model.block_operator());
}

Mat noise_injection(const SpectralModel& model, double t) {
    Mat N = Mat::Zero(model.n(), model.k());
    N.bottomRows(model.d()) = model.sigma_at(t);
    return N;
}

Mat covariance(const SpectralModel& model, double s, double t) {
    if (!(t > s)) throw DomainError("covariance: need t > s");
    if (model.time_dependent()) return covariance_by_quadrature(model, s, t);
    if (closed_form_applies(model)) return closed_form_cov(model, t - s);
    Mat Nn = noise_injection(model, s);
    return linalg::van_loan(model.block_operator(), Nn * Nn.transpose(), t - s);
}

Mat covariance_by_quadrature(const SpectralModel& model, double s, double t, double tol) {
    if (!(t > s)) throw DomainError("covariance_by_quadrature: need t > s");
    const Mat A = model.block_operator();
    // Integrate over the lag u = t - r.
    auto f = [&](double u) {
        Mat E = linalg::expm(u * A);
        Mat Nn = noise_injection(model, t - u);
        Mat K = E * Nn;
        return Mat(K * K.transpose());
    };
    quad::AdaptiveOptions opt;
    opt.abs_tol = tol;
    opt.rel_tol = tol;
    Mat C = quad::integrate(f, 0.0, t - s, opt).value;
    linalg::symmetrize(C);
    return C;
}

GaussianLaw transition_law(const SpectralModel& model, double s, double t, const Vec& z) {
    if (!(t > s)) throw DomainError("transition_law: need t > s");
    if (z.size() != model.n()) throw DomainError("transition_law: state has wrong dimension");
    GaussianLaw law;
    law.mean = flow_matrix(model, t - s) * z;
    law.cov = covariance(model, s, t);
    return law;
}

GaussianLaw push_forward(const GaussianLaw& law, const Mat& F, const Mat& cov_add) {
    GaussianLaw out;
    out.mean = F * law.mean;
    out.cov = F * law.cov * F.transpose() + cov_add;
    linalg::symmetrize(out.cov);
    return out;
}

StepLaw step_law(const SpectralModel& model, double t0, double t1) {
    if (!(t1 > t0)) throw DomainError("step_law: need t1 > t0");
    const double h = t1 - t0;
    const int n = model.n(), d = model.d(), k = model.k();
    const Mat A = model.block_operator();
    StepLaw L;
    L.t0 = t0;
    L.h = h;
    L.F = linalg::expm(h * A);
    Mat P = linalg::phi1(A, h);
    L.G = P.rightCols(d);
    Mat Cee, CeW;
    if (!model.time_dependent()) {
        Mat Nn = noise_injection(model, t0);
        Cee = covariance(model, t0, t1);
        CeW = P * Nn;
    } else {
        Cee = covariance_by_quadrature(model, t0, t1);
        auto f = [&](double u) { return Mat(linalg::expm((h - u) * A) * noise_injection(model, t0 + u)); };
        CeW = quad::integrate(f, 0.0, h).value;
    }
    L.KW = CeW / h;
    Mat Ccond = Cee - CeW * CeW.transpose() / h;
    linalg::symmetrize(Ccond);
    L.R = linalg::psd_factor(Ccond);
    if (L.KW.rows() != n || L.KW.cols() != k) throw NumericalError("step_law: shape mismatch");
    return L;
}

std::vector<double> row_major(const Mat& M) {
    std::vector<double> out(static_cast<std::size_t>(M.size()));
    for (Eigen::Index r = 0; r < M.rows(); ++r)
        for (Eigen::Index c = 0; c < M.cols(); ++c) out[r * M.cols() + c] = M(r, c);
    return out;
}

}  // namespace degsde::linear_flow
