#pragma once

#include "degsde/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace degsde::model {

// ---------------------------------------------------------------------------
// Moduli of continuity
// ---------------------------------------------------------------------------

enum class ModulusFamily { power, log_power, log_sqrt, table, custom };

std::string family_tag(ModulusFamily f);
ModulusFamily parse_family(const std::string& tag);

class Modulus {
public:
    Modulus();  // power(1, 1/2)

    /// phi(s) = K s^alpha
    static Modulus power(double K, double alpha);
    /// phi(s) = K / log(c + 1/s)^{1+r}. c <= 0 selects the smallest c for which
    /// phi^2 is concave, c = e^{2(1+r)+1}.
    static Modulus log_power(double K, double r, double c = 0.0);
    /// phi(s) = K / sqrt(log(c + 1/s)). c <= 0 selects c = e^2.
    static Modulus log_sqrt(double K, double c = 0.0);
    /// Piecewise-linear table through (s_i, v_i), s strictly increasing and
    /// positive; power-law extrapolation through the origin below s_0 and
    /// constant above the last node.
    static Modulus table(std::vector<double> s, std::vector<double> values);
    static Modulus custom(std::string name, std::function<double(double)> eval);

    double operator()(double s) const;

    ModulusFamily family() const { return family_; }
    double K() const { return K_; }
    double alpha() const { return alpha_; }
    double c() const { return c_; }
    double r() const { return r_; }
    const std::string& name() const { return name_; }

    /// Checks phi(0) = 0 and positivity/monotonicity on a geometric grid.
    /// Throws InvalidModulus.
    void validate() const;

private:
    ModulusFamily family_ = ModulusFamily::power;
    double K_ = 1.0, alpha_ = 0.5, c_ = 0.0, r_ = 0.0;
    std::string name_ = "power";
    std::vector<double> ts_, tv_;
    std::function<double(double)> eval_;
};

/// Midpoint test of phi^2 over all pairs of a 64-point geometric grid on
/// [1e-12, 1e3]. Returns the worst (most negative) slack.
double phi_squared_concavity_slack(const Modulus& phi);

struct ModulusClass {
    bool in_D0 = false;
    bool in_D1 = false;
    bool in_D2 = false;
    bool dini_finite = false;
    bool phi2_concave = false;
    bool heuristic = false;  ///< verdict extrapolated from truncated integrals
    double dini_integral_value = 0.0;  ///< int_{quad_floor}^1 phi(s)/s ds
    double growth_exponent = 0.0;  ///< fitted q in I(L) ~ L^q, L = log(1/floor)
};

ModulusClass classify_modulus(const Modulus& phi, double quad_floor);

/// int_{lo}^{1} phi(s)/s ds, computed in the variable log s.
double dini_integral(const Modulus& phi, double lo);

// ---------------------------------------------------------------------------
// Linear part
// ---------------------------------------------------------------------------

/// lambda_i = coeff * i^power for modes beyond the truncation (1-based i).
struct TailRule {
    double coeff = 1.0;
    double power = 2.0;
};

enum class ModelKind { kinetic, second_order, wave, custom };

std::string kind_tag(ModelKind k);

struct SpectralModel {
    Mat A1, A2, B, A0;
    Mat sigma;  ///< constant noise coefficient, d x k
    std::function<Mat(double)> sigma_fn;  ///< optional time dependence
    double delta = 0.5;
    std::optional<TailRule> tail;
    ModelKind kind = ModelKind::custom;

    int m() const { return static_cast<int>(A1.rows()); }
    int d() const { return static_cast<int>(A2.rows()); }
    int k() const { return static_cast<int>(sigma.cols()); }
    int n() const { return m() + d(); }

    bool time_dependent() const { return static_cast<bool>(sigma_fn); }
    Mat sigma_at(double t) const { return sigma_fn ? sigma_fn(t) : sigma; }

    /// [[A1, B], [0, A2]]
    Mat block_operator() const;
    /// A2 = -diag(lambda) with 0 < lambda_1 <= ... <= lambda_d.
    bool is_spectral() const;
    /// -diag(A2); meaningful when is_spectral().
    Vec eigenvalues() const;

    /// Shape checks only (dimensions agree). Throws DomainError.
    void check_shapes() const;
};

struct HypothesisCheck {
    std::string label;
    bool pass = false;
    double residual = 0.0;  ///< intertwining / commutation / symmetry residual
    double margin = 0.0;  ///< smallest singular value where relevant
    std::string detail;
};

struct ValidationReport {
    std::vector<HypothesisCheck> checks;
    int n0 = 0;  ///< smallest truncation level from which (H4) holds
    bool all_pass() const;
    const HypothesisCheck& get(const std::string& label) const;
    std::string summary() const;
};

ValidationReport validate_hypotheses(const SpectralModel& model);

/// Throws HypothesisViolation naming the first failing assumption.
void require_hypotheses(const SpectralModel& model);

double intertwining_residual(const SpectralModel& model, double t);

// ---------------------------------------------------------------------------
// Drifts
// ---------------------------------------------------------------------------

using DriftFn = std::function<Vec(double t, const Vec& x, const Vec& y)>;

struct DriftSpec {
    std::string name;
    int m = 0, d = 0;
    DriftFn eval;
    double alpha = 0.75;
    Modulus phi;
    double K = 1.0;
    std::optional<double> sup_norm;  ///< empty means unbounded
    /// Extra Lipschitz constant in y allowed by the regularity check. Nonzero
    /// only for drifts that carry a linear -y term after a reformulation.
    double y_lipschitz = 0.0;
    std::function<double(double)> ell;  ///< growth function of the one-sided bound
    std::function<double(double)> h;

    Vec operator()(double t, const Vec& z) const;
};

/// Max over sampled pairs of |b(z)-b(z')| - K|x-x'|^alpha - phi(|y-y'|)
/// (minus y_lipschitz |y-y'| when set). Pairs satisfy |z - z'| <= ball_radius.
/// Pair i always comes from substream i, so a larger n_samples is a superset.
double validate_drift_regularity(const DriftSpec& b, double ball_radius, long n_samples,
                                 std::uint64_t seed);

struct DriftParams {
    double amplitude = 1.0;
    double alpha = 0.75;
    double eps = 0.05;  ///< width of the steep tanh profile
    double power = 0.25;  ///< exponent of power_y
    Modulus phi = Modulus::log_power(1.0, 1.0);
    Vec constant;  ///< value of the constant drift (default: amplitude * ones)
    Vec mode_weights;  ///< per-mode weights of the wave profile drift
};

std::vector<std::string> drift_families();
DriftSpec make_drift(const std::string& family, int m, int d, const DriftParams& p = {});

// ---------------------------------------------------------------------------
// Built-in examples
// ---------------------------------------------------------------------------

struct ExampleParams {
    double theta = 1.0;
    int d_space = 1;
    int n_modes = 16;
    std::optional<double> delta;
    int dim = 1;  ///< m = d for kinetic and second_order
    std::optional<Mat> A1, A2, B, A0, sigma;  ///< kinetic overrides
    std::string drift = "zero";
    DriftParams drift_params;
};

struct Example {
    SpectralModel model;
    DriftSpec drift;
};

/// kind in {kinetic, second_order, wave}.
Example build_example(const std::string& kind, const ExampleParams& params);

/// First n eigenvalues of the Dirichlet Laplacian on (0,1)^d_space, sorted.
std::vector<double> dirichlet_eigenvalues(int d_space, int n);

}  // namespace degsde::model
