#pragma once

#include "degsde/model.hpp"
#include "degsde/rng.hpp"
#include "degsde/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace degsde::linear_flow {

using model::SpectralModel;

/// Paths are simulated in blocks of this many; each block owns a substream.
inline constexpr std::size_t kBlock = 256;

struct GaussianLaw {
    Vec mean;
    Mat cov;
};

/// e^{h A} for the block operator A = [[A1, B], [0, A2]].
Mat flow_matrix(const SpectralModel& model, double h);

/// Noise injection [0; sigma_t], (m+d) x k.
Mat noise_injection(const SpectralModel& model, double t);

/// Covariance of the linear flow from s to t. Closed form per mode when
/// A1 = A2 and B are diagonal, Van Loan otherwise, quadrature when sigma
/// depends on time.
Mat covariance(const SpectralModel& model, double s, double t);

/// Independent route: adaptive quadrature of e^{uA} N e^{uA^T}.
Mat covariance_by_quadrature(const SpectralModel& model, double s, double t, double tol = 1e-13);

GaussianLaw transition_law(const SpectralModel& model, double s, double t, const Vec& z);

/// Law of F Z + xi with Z ~ law and independent xi ~ N(0, cov_add).
GaussianLaw push_forward(const GaussianLaw& law, const Mat& F, const Mat& cov_add);

/// I_k(a, h) = int_0^h u^k e^{-a u} du, k in {0, 1, 2}.
double exp_moment(int k, double a, double h);

/// Exact one-step law of the stochastic convolution increment eta together
/// with the Brownian increment dW over [t0, t0 + h]:
///   dW = sqrt(h) xi_1,  eta = KW dW + R xi_2.
struct StepLaw {
    double t0 = 0.0, h = 0.0;
    Mat F;   ///< e^{h A}
    Mat G;   ///< int_0^h e^{uA} du [0; I_d], gain of a frozen drift
    Mat KW;  ///< Cov(eta, dW) / h
    Mat R;   ///< factor of Cov(eta | dW)
};

StepLaw step_law(const SpectralModel& model, double t0, double t1);

/// Draws (dW, eta) for a block of nb paths in structure-of-arrays layout
/// (component-major, leading dimension nb). Normals are consumed from rng
/// in a fixed order: all dW components first, then the residual.
class StepNoise {
public:
    explicit StepNoise(const StepLaw& law);
    void draw(Rng& rng, std::size_t nb, double* dW, double* eta);
    int n() const { return n_; }
    int k() const { return k_; }

private:
    int n_, k_, r_;
    double sqrt_h_;
    std::vector<double> KW_, R_;  // row-major copies
    std::vector<double> xi_;
};

/// Row-major copy of an Eigen matrix for the path kernels.
std::vector<double> row_major(const Mat& M);

struct PathBundle {
    std::vector<double> times;  ///< t_0 < ... < t_N
    int n_paths = 0;
    int n_state = 0;
    int n_noise = 0;
    std::vector<double> states;  ///< [path][step 0..N][component]
    std::vector<double> dW;      ///< [path][step 0..N-1][noise component]
    std::vector<double> eta;     ///< [path][step 0..N-1][component]
    std::uint64_t seed = 0;
    std::string stream;

    int n_steps() const { return static_cast<int>(times.size()) - 1; }
    double state(int p, int i, int c) const {
        return states[(static_cast<std::size_t>(p) * times.size() + i) * n_state + c];
    }
    Vec state_vec(int p, int i) const;
    Vec terminal(int p) const { return state_vec(p, n_steps()); }
};

PathBundle sample_linear(const SpectralModel& model, double s, double t, const Vec& z, int n_paths,
                         int n_steps, std::uint64_t seed);

enum class P0Method { gauss_hermite, monte_carlo };

struct P0Budget {
    int gh_points = 12;
    long n_paths = 100000;
    std::uint64_t seed = 1;
};

/// P0_{s,t} f(z) = E f(Z_{s,t}(z)). Gauss-Hermite needs m + d <= 4.
Estimate apply_P0(const SpectralModel& model, double s, double t, const Observable& f, const Vec& z,
                  P0Method method, const P0Budget& budget = {});

/// Gauss-Hermite expectation of a vector observable under a Gaussian law.
Vec expect_gh(const GaussianLaw& law, const VectorObservable& f, int points);
double expect_gh(const GaussianLaw& law, const Observable& f, int points);

struct HsNoiseReport {
    double value = 0.0;  ///< truncated modes, closed form
    double value_with_tail = 0.0;  ///< plus modes generated by the tail rule
    double c1 = 0.0;  ///< sup ||sigma||^2 used for the tail modes
    double bound_c2 = 0.0;
    double bound = 0.0;  ///< c2 (t-s)^delta
    double exponent_check = 0.0;  ///< fitted slope over gaps 2^-8 .. 2^-3
};

HsNoiseReport hs_noise_integral(const SpectralModel& model, double s, double t);

/// sum_{i >= a} i^{-p} for p > 1, a >= 1 (Euler-Maclaurin after explicit terms).
double hurwitz_tail(double p, long a);

}  // namespace degsde::linear_flow
