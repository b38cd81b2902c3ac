#pragma once

#include "degsde/model.hpp"
#include "degsde/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace degsde::bismut {

using model::SpectralModel;

struct GramianResult {
    Mat Q;
    Mat Q_inv;
    double condition = 0.0;
};

/// Q_t = int_0^t u(t-u) e^{uA0} B B^T e^{uA0^T} du. Throws SingularGramian
/// when the condition number exceeds 1e14.
GramianResult gramian_Q(const SpectralModel& model, double t);

struct GramianScaling {
    std::vector<double> t;
    std::vector<double> scaled;  ///< ||Q_t^{-1}|| t^3
    double sup = 0.0;
};

/// ||Q_t^{-1}|| t^3 over t in {2^-6, ..., 1} unless ts is given.
GramianScaling gramian_bound_check(const SpectralModel& model, std::vector<double> ts = {});

/// Controls steering the perturbed linear flow back onto the unperturbed one
/// at time T.
class ControlPair {
public:
    ControlPair(const SpectralModel& model, double s, double T, const Vec& v);

    const Vec& V() const { return V_; }
    double s() const { return s_; }
    double T() const { return T_; }
    const Vec& v() const { return v_; }

    /// Phi(r) in R^d.
    Vec phi(double r) const;
    /// sigma_r^T (sigma_r sigma_r^T)^{-1} Phi(r) in R^k, the Bismut weight integrand.
    Vec weight_integrand(double r) const;
    /// Averages of weight_integrand over each cell of a uniform n_steps grid
    /// (3-point Gauss-Legendre per cell). Row j is cell j.
    Mat cell_averages(int n_steps) const;

private:
    Mat A0_, A2_, B_, sigma_;
    std::function<Mat(double)> sigma_fn_;
    double s_, T_;
    Vec v_, V_;
};

ControlPair perturbation_controls(const SpectralModel& model, double s, double T, const Vec& v);

struct GradientEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    long n_paths = 0;
    Vec v;
    double s = 0.0, T = 0.0;
    std::uint64_t seed = 0;
};

GradientEstimate bismut_gradient(const SpectralModel& model, double s, double T, const Observable& f,
                                 const Vec& z, const Vec& v, long n_paths, int n_steps, std::uint64_t seed);

/// All (observable, direction) pairs on one set of paths. Result indexed [f][v].
std::vector<std::vector<GradientEstimate>> bismut_gradient_batch(
    const SpectralModel& model, double s, double T, const std::vector<Observable>& fs, const Vec& z,
    const std::vector<Vec>& vs, long n_paths, int n_steps, std::uint64_t seed);

/// grad_v grad_vt P0_{s,T} f(z) through the midpoint split; n_steps must be even.
GradientEstimate bismut_hessian(const SpectralModel& model, double s, double T, const Observable& f,
                                const Vec& z, const Vec& v, const Vec& v_tilde, long n_paths, int n_steps,
                                std::uint64_t seed);

struct CouplingReport {
    double terminal_gap = 0.0;  ///< |(X^eps - X^0, Y^eps - Y^0)(T)|, by quadrature
    Vec gap;                    ///< the terminal difference itself
    Estimate girsanov_mean;     ///< sample mean of R_eps
};

CouplingReport verify_coupling(const SpectralModel& model, double s, double T, const Vec& v, double eps,
                               long n_paths, int n_steps, std::uint64_t seed);

/// Deterministic difference of the perturbed and unperturbed flows at time t
/// in [s, T], per unit eps, computed from the defining Duhamel integrals.
Vec coupling_gap(const SpectralModel& model, const ControlPair& c, double t);

struct VarianceBound {
    double ratio = 0.0;  ///< at the requested (s, T)
    double energy = 0.0;  ///< int_s^T |sigma^T (sigma sigma^T)^{-1} Phi|^2 dr
    std::vector<double> gaps;
    std::vector<double> ratios;
    double sup = 0.0;
};

/// Ratio of the weight energy to |v1|^2/(T-s)^3 + |v2|^2/(T-s), also over the
/// sweep (T-s) 2^-j, j = 0..6.
VarianceBound variance_bound_check(const SpectralModel& model, double s, double T, const Vec& v);

enum class Component { x, y };

struct ScalingBudget {
    long n_paths = 20000;
    int n_steps = 64;
    std::uint64_t seed = 1;
};

struct ScalingResult {
    double slope = 0.0;
    double slope_stderr = 0.0;
    std::vector<double> gaps;
    std::vector<double> sup_grad;
    std::vector<double> rel_stderr;  ///< of the maximizing estimate per gap
    bool wide_confidence = false;
    std::string warning;
};

/// The probe set: origin plus Halton points inside the ball of radius 2.
std::vector<Vec> probe_points(int n, int count = 8);

ScalingResult scaling_exponent(const SpectralModel& model, const Observable& f, Component component,
                               const std::vector<double>& gaps, const ScalingBudget& budget = {});

}  // namespace degsde::bismut
