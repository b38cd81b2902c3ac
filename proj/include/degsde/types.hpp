#pragma once

#include <Eigen/Dense>

#include <functional>

namespace degsde {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Scalar observable of the full state z = (x, y).
using Observable = std::function<double(const Vec&)>;

/// Vector-valued observable (used for fields with values in the noise space).
using VectorObservable = std::function<Vec(const Vec&)>;

/// Monte-Carlo estimate with its standard error (sample sd / sqrt(n)).
struct Estimate {
    double value = 0.0;
    double stderr_ = 0.0;
    long n = 0;
};

}  // namespace degsde
