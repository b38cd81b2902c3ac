#include "degsde/error.hpp"
#include "degsde/linalg.hpp"
#include "degsde/model.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <sstream>

namespace degsde::model {

namespace {

constexpr double kMarginTol = 1e-10;
constexpr double kIntertwiningTol = 1e-8;

double op_norm(const Mat& A) {
    if (A.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(A);
    return svd.singularValues()(0);
}

// Orthonormal basis of the column space of M.
Mat range_basis(const Mat& M) {
    if (M.cols() == 0) return Mat(M.rows(), 0);
    Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeThinU);
    const Vec& s = svd.singularValues();
    double tol = std::max(1e-12, 1e-12 * (s.size() ? s(0) : 0.0));
    int r = 0;
    while (r < s.size() && s(r) > tol) ++r;
    return svd.matrixU().leftCols(r);
}

}  // namespace

std::string kind_tag(ModelKind k) {
    switch (k) {
        case ModelKind::kinetic: return "kinetic";
        case ModelKind::second_order: return "second_order";
        case ModelKind::wave: return "wave";
        case ModelKind::custom: return "custom";
    }
    return "custom";
}

Mat SpectralModel::block_operator() const {
    const int mm = m(), dd = d();
    Mat A = Mat::Zero(mm + dd, mm + dd);
    A.topLeftCorner(mm, mm) = A1;
    A.topRightCorner(mm, dd) = B;
    A.bottomRightCorner(dd, dd) = A2;
    return A;
}

bool SpectralModel::is_spectral() const {
    if (!linalg::is_diagonal(A2)) return false;
    double prev = 0.0;
    for (int i = 0; i < d(); ++i) {
        double lam = -A2(i, i);
        if (!(lam > 0) || lam < prev) return false;
        prev = lam;
    }
    return true;
}

Vec SpectralModel::eigenvalues() const {
    return -A2.diagonal();
}

void SpectralModel::check_shapes() const {
    const int mm = m(), dd = d();
    auto fail = [](const std::string& what) { throw DomainError("model shape: " + what); };
    if (A1.cols() != mm) fail("A1 must be square");
    if (A2.cols() != dd) fail("A2 must be square");
    if (B.rows() != mm || B.cols() != dd) fail("B must be m x d");
    if (A0.rows() != mm || A0.cols() != mm) fail("A0 must be m x m");
    if (sigma.rows() != dd) fail("sigma must have d rows");
    if (!(delta > 0 && delta < 1)) fail("delta must lie in (0,1)");
}

double intertwining_residual(const SpectralModel& model, double t) {
    Mat lhs = model.B * linalg::expm(t * model.A2);
    Mat rhs = linalg::expm(t * model.A1) * linalg::expm(t * model.A0) * model.B;
    return op_norm(lhs - rhs);
}

bool ValidationReport::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

const HypothesisCheck& ValidationReport::get(const std::string& label) const {
    for (const auto& c : checks)
        if (c.label == label) return c;
    throw DomainError("no check labelled " + label);
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    for (const auto& c : checks)
        os << c.label << ": " << (c.pass ? "pass" : "FAIL") << " (residual " << c.residual
           << ", margin " << c.margin << ") " << c.detail << "\n";
    return os.str();
}

ValidationReport validate_hypotheses(const SpectralModel& model) {
    model.check_shapes();
    ValidationReport rep;
    const int mm = model.m(), dd = model.d();

    {
        HypothesisCheck h1;
        h1.label = "H1";
        double margin = INFINITY;
        const double ts[] = {0.0, 0.25, 0.5, 0.75, 1.0};
        int samples = model.time_dependent() ? 5 : 1;
        for (int i = 0; i < samples; ++i) {
            Mat s = model.sigma_at(ts[i]);
            margin = std::min(margin, linalg::min_singular_value(s * s.transpose()));
        }
        h1.margin = margin;
        h1.pass = margin >= kMarginTol;
        h1.detail = "min singular value of sigma sigma^T";
        rep.checks.push_back(h1);
    }
    {
        HypothesisCheck h2;
        h2.label = "H2";
        h2.margin = linalg::min_singular_value(model.B * model.B.transpose());
        double res = 0.0;
        for (double t : {0.1, 0.5, 1.0}) res = std::max(res, intertwining_residual(model, t));
        h2.residual = res;
        h2.pass = h2.margin >= kMarginTol && res <= kIntertwiningTol;
        h2.detail = h2.margin < kMarginTol ? "B B^T is singular" : "intertwining B e^{tA2} = e^{tA1} e^{tA0} B";
        rep.checks.push_back(h2);
    }
    {
        HypothesisCheck h3;
        h3.label = "H3";
        double asym = (model.A2 - model.A2.transpose()).cwiseAbs().maxCoeff();
        h3.residual = asym;
        bool ok = asym <= 1e-12;
        std::ostringstream detail;
        if (!ok) detail << "-A2 is not self-adjoint";
        if (ok && model.tail) {
            // Infinite-dimensional reading: spectrum must be positive, ordered,
            // and the analytic tail sum of lambda_i^{delta-1} must converge.
            if (!model.is_spectral()) {
                ok = false;
                detail << "tail rule requires -A2 = diag(lambda) with 0 < lambda_1 <= ...";
            } else if (!(model.tail->coeff > 0) || !(model.tail->power * (1.0 - model.delta) > 1.0)) {
                ok = false;
                detail << "sum lambda_i^{delta-1} diverges for tail power " << model.tail->power
                       << " and delta " << model.delta;
            } else {
                detail << "spectral with convergent tail";
            }
            if (model.is_spectral()) h3.margin = model.eigenvalues()(0);
        } else if (ok) {
            detail << "finite truncation, -A2 self-adjoint";
            if (dd > 0) {
                Eigen::SelfAdjointEigenSolver<Mat> es(-model.A2);
                h3.margin = es.eigenvalues()(0);
            }
        }
        h3.pass = ok;
        h3.detail = detail.str();
        rep.checks.push_back(h3);
    }
    {
        HypothesisCheck h4;
        h4.label = "H4";
        // Eigenbasis of A2 ordered by increasing lambda.
        Mat E;
        if (linalg::is_diagonal(model.A2)) {
            E = Mat::Identity(dd, dd);
        } else {
            Eigen::SelfAdjointEigenSolver<Mat> es(-0.5 * (model.A2 + model.A2.transpose()));
            E = es.eigenvectors();
        }
        std::vector<double> res(dd + 1, 0.0);
        for (int n = 1; n <= dd; ++n) {
            Mat En = E.leftCols(n);
            Mat P2 = En * En.transpose();
            Mat Q = range_basis(model.B * En);
            Mat P1 = Q * Q.transpose();
            double r1 = (P1 * model.B - model.B * P2).cwiseAbs().maxCoeff();
            double r2 = mm ? (P1 * model.A1 - model.A1 * P1).cwiseAbs().maxCoeff() : 0.0;
            res[n] = std::max(r1, r2);
        }
        int n0 = dd + 1;
        double worst = 0.0;
        for (int n = dd; n >= 1; --n) {
            if (res[n] > kIntertwiningTol) break;
            n0 = n;
            worst = std::max(worst, res[n]);
        }
        h4.pass = n0 <= dd;
        h4.residual = h4.pass ? worst : (dd ? res[dd] : 0.0);
        rep.n0 = h4.pass ? n0 : 0;
        h4.detail = "projection commutation, n0 = " + std::to_string(rep.n0);
        rep.checks.push_back(h4);
    }
    return rep;
}

void require_hypotheses(const SpectralModel& model) {
    ValidationReport rep = validate_hypotheses(model);
    for (const auto& c : rep.checks)
        if (!c.pass) throw HypothesisViolation(c.label, c.detail);
}

}  // namespace degsde::model
