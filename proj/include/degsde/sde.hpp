#pragma once

#include "degsde/model.hpp"
#include "degsde/regularization.hpp"
#include "degsde/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace degsde::sde {

using model::DriftSpec;
using model::SpectralModel;

inline constexpr double kBlowUp = 1e8;

/// Brownian increments and exact stochastic-convolution increments of one
/// path on a uniform grid over [s, T].
struct NoiseRecord {
    double s = 0.0, T = 1.0;
    int n_steps = 0;
    int k = 0, n = 0;
    std::vector<double> dW;   ///< [step][k]
    std::vector<double> eta;  ///< [step][n]
    std::uint64_t seed = 0;
    std::uint64_t path = 0;

    double h() const { return (T - s) / n_steps; }
    const double* dW_at(int i) const { return &dW[static_cast<std::size_t>(i) * k]; }
    const double* eta_at(int i) const { return &eta[static_cast<std::size_t>(i) * n]; }

    /// Draws from substream ("sde.noise", path) of seed.
    static NoiseRecord draw(const SpectralModel& model, double s, double T, int n_steps, std::uint64_t seed,
                            std::uint64_t path = 0);
    /// Same path on a grid with n_steps / factor steps; factor must be a power
    /// of two dividing n_steps. Exact: eta' = e^{hA} eta_1 + eta_2.
    NoiseRecord coarsen(const SpectralModel& model, int factor) const;
};

struct MildTrajectory {
    std::vector<double> times;
    int n_state = 0;
    std::vector<double> states;  ///< [step 0..N][component]
    NoiseRecord noise;
    bool blew_up = false;
    std::optional<double> blowup_time;

    int n_steps() const { return static_cast<int>(times.size()) - 1; }
    Vec state(int i) const {
        return Eigen::Map<const Vec>(&states[static_cast<std::size_t>(i) * n_state], n_state);
    }
};

/// Exponential Euler: Z <- e^{hA} Z + int_0^h e^{uA} du [0; b(t, Z)] + eta.
/// Stops at the first state with |Z| > 1e8 and records the time.
MildTrajectory integrate_mild(const SpectralModel& model, const DriftSpec& b, const Vec& z0, const NoiseRecord& noise);
MildTrajectory integrate_mild(const SpectralModel& model, const DriftSpec& b, const Vec& z0, double T, int n_steps,
                              std::uint64_t seed);

/// psi(r) = 1 on [0, 1], 0 on [2, inf), quintic smoothstep in between.
double cutoff_psi(double r);

/// b^{[m]}_t(z) = b_{t ^ m}(z) psi(|z| / m).
DriftSpec cutoff_drift(const DriftSpec& b, double m_level);

struct GapRow {
    int n_steps = 0;
    double sup_gap = 0.0;
    double terminal_gap = 0.0;
    bool blew_up = false;
    std::optional<double> blowup_time;
};

/// Two trajectories on the same recorded noise from z0 and z0 + perturbation
/// (along (1, ..., 1)/sqrt(n)). The noise is drawn at the finest count and
/// coarsened, so step counts must be powers of two apart.
std::vector<GapRow> uniqueness_experiment(const SpectralModel& model, const DriftSpec& b, const Vec& z0,
                                          double perturbation, double T, const std::vector<int>& n_steps,
                                          std::uint64_t seed, std::uint64_t path = 0);

/// max_t |Y_t - RHS_t| for the representation identity along a trajectory.
/// The sigma dW part uses the recorded convolution increments, the gradient
/// part left-point sums, the ds part the trapezoid rule. Throws CoverageError
/// at the first time the path leaves the box of `box`.
double representation_residual(const SpectralModel& model, const MildTrajectory& traj,
                               const regularization::Field& field, double lambda,
                               const regularization::FieldGrid* box = nullptr);

struct ResidualSweep {
    std::vector<int> n_steps;
    std::vector<double> residual;  ///< mean over paths of the per-path max residual
    std::vector<double> ratios;    ///< residual[i] / residual[i+1]
};

/// Paths from one finest noise record per path, coarsened to each count.
ResidualSweep residual_sweep(const SpectralModel& model, const DriftSpec& b, const Vec& z0,
                             const regularization::Field& field, double lambda, double T,
                             const std::vector<int>& n_steps, int n_paths, std::uint64_t seed,
                             const regularization::FieldGrid* box = nullptr);

struct BihariCurve {
    std::vector<double> t;
    std::vector<double> bound;
    double gamma_eta = 0.0;  ///< Gamma_T(eta_T)
    bool non_osgood_warning = false;
    std::string warning;
};

/// Gamma(s) = int_1^s dr / (2 ell(C + C r)); bound(t) = Gamma^{-1}(Gamma(eta_T) + t).
BihariCurve bihari_bound(const std::function<double(double)>& ell, double eta_T, double T, double C_env,
                         int n_points = 65);

double bihari_gamma(const std::function<double(double)>& ell, double C_env, double s);

struct EnvelopeReport {
    int n_paths = 0;
    int blowups = 0;
    double eta_T = 0.0;  ///< |Y_0|^2 + 2 int_0^T h(|xi_t|) dt, largest over the paths
    double C_env = 0.0;  ///< largest per-path envelope constant
    double worst_ratio = 0.0;  ///< max over paths and times of sup|Y - xi|^2 / bound(t)
    BihariCurve curve;
    bool all_below = false;
};

/// Simulates n_paths paths of the drift and checks sup_{r<=t}|Y_r|^2 against
/// the Bihari curve built from quantities measured on the same paths.
EnvelopeReport envelope_experiment(const SpectralModel& model, const DriftSpec& b, const Vec& z0, double T,
                                   int n_steps, int n_paths, std::uint64_t seed);

}  // namespace degsde::sde
