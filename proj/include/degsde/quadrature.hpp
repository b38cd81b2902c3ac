#pragma once

#include "degsde/types.hpp"

#include <functional>
#include <vector>

namespace degsde::quad {

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Legendre rule on [-1, 1].
Rule gauss_legendre(int n);

/// Gauss-Hermite rule for the standard normal weight: sum w_i f(x_i) = E f(N(0,1)).
/// Nodes come from the Golub-Welsch eigenproblem.
Rule gauss_hermite(int n);

struct AdaptiveOptions {
    double abs_tol = 1e-13;
    double rel_tol = 1e-12;
    int max_depth = 30;
};

struct MatResult {
    Mat value;
    double error = 0.0;
    bool converged = true;
};

/// Adaptive Gauss-Kronrod (7/15) integration of a matrix-valued integrand.
/// The error estimate is the max-abs difference between the two rules.
MatResult integrate(const std::function<Mat(double)>& f, double a, double b,
                    const AdaptiveOptions& opt = {});

/// Scalar adaptive integration (Boost Gauss-Kronrod).
double integrate_scalar(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12, double* error = nullptr);

}  // namespace degsde::quad
