#include "degsde/linalg.hpp"

#include "degsde/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace degsde::linalg {

bool is_diagonal(const Mat& A, double tol) {
    if (A.rows() != A.cols()) return false;
    for (Eigen::Index j = 0; j < A.cols(); ++j)
        for (Eigen::Index i = 0; i < A.rows(); ++i)
            if (i != j && std::abs(A(i, j)) > tol) return false;
    return true;
}

Mat expm(const Mat& A) {
    if (A.rows() != A.cols()) throw DomainError("expm: matrix must be square");
    const auto n = A.rows();
    if (n == 0) return Mat(0, 0);
    if (A.isZero(0.0)) return Mat::Identity(n, n);
    if (is_diagonal(A)) {
        Mat E = Mat::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) E(i, i) = std::exp(A(i, i));
        return E;
    }
    Mat E = A.exp();
    if (!E.allFinite()) throw NumericalError("expm: non-finite result");
    return E;
}

Mat psd_factor(const Mat& C, double rel_tol) {
    const auto n = C.rows();
    if (n == 0 || C.isZero(0.0)) return Mat::Zero(n, 0);
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (C + C.transpose()));
    const Vec& ev = es.eigenvalues();
    double top = ev.cwiseAbs().maxCoeff();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < n; ++i)
        if (ev(i) > rel_tol * top) keep.push_back(i);
    Mat L(n, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j)
        L.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(keep[j]) * std::sqrt(ev(keep[j]));
    return L;
}

double min_singular_value(const Mat& A) {
    if (A.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(A);
    return svd.singularValues().minCoeff();
}

double condition_number(const Mat& A) {
    Eigen::JacobiSVD<Mat> svd(A);
    const Vec& s = svd.singularValues();
    if (s.minCoeff() == 0.0) return INFINITY;
    return s.maxCoeff() / s.minCoeff();
}

Mat van_loan(const Mat& A, const Mat& N, double h) {
    const auto n = A.rows();
    if (N.isZero(0.0)) return Mat::Zero(n, n);
    Mat M = Mat::Zero(2 * n, 2 * n);
    M.topLeftCorner(n, n) = A * h;
    M.topRightCorner(n, n) = N * h;
    M.bottomRightCorner(n, n) = -A.transpose() * h;
    Mat E = expm(M);
    // E = [[e^{hA}, G],[0, e^{-hA^T}]] with integral = G e^{hA^T}.
    Mat C = E.topRightCorner(n, n) * E.topLeftCorner(n, n).transpose();
    symmetrize(C);
    return C;
}

Mat phi1(const Mat& A, double h) {
    const auto n = A.rows();
    if (A.isZero(0.0)) return Mat::Identity(n, n) * h;
    if (is_diagonal(A)) {
        Mat P = Mat::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double a = A(i, i);
            P(i, i) = std::abs(a * h) < 1e-8 ? h * (1.0 + 0.5 * a * h) : std::expm1(a * h) / a;
        }
        return P;
    }
    Mat M = Mat::Zero(2 * n, 2 * n);
    M.topLeftCorner(n, n) = A * h;
    M.topRightCorner(n, n) = Mat::Identity(n, n) * h;
    Mat E = expm(M);
    return E.topRightCorner(n, n);
}

void symmetrize(Mat& C) {
    C = 0.5 * (C + C.transpose()).eval();
}

}  // namespace degsde::linalg
