#pragma once

#include "degsde/types.hpp"

namespace degsde::linalg {

/// Matrix exponential. Zero and diagonal inputs take exact shortcuts; the
/// general case goes through Eigen's scaling-and-squaring Pade routine.
Mat expm(const Mat& A);

bool is_diagonal(const Mat& A, double tol = 0.0);

/// Factor L (n x r) with L L^T = C for a symmetric PSD matrix C. Eigenvalues
/// below rel_tol * max eigenvalue are treated as zero, so r is the numerical rank.
Mat psd_factor(const Mat& C, double rel_tol = 1e-13);

double min_singular_value(const Mat& A);
double condition_number(const Mat& A);

/// Van Loan: integral_0^h e^{uA} N e^{uA^T} du for symmetric N.
Mat van_loan(const Mat& A, const Mat& N, double h);

/// integral_0^h e^{uA} du.
Mat phi1(const Mat& A, double h);

/// Symmetrize in place (average with the transpose).
void symmetrize(Mat& C);

}  // namespace degsde::linalg
