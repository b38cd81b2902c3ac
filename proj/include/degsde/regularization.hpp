#pragma once

#include "degsde/model.hpp"
#include "degsde/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace degsde::regularization {

using model::DriftSpec;
using model::SpectralModel;

/// A d-valued field u_s(z) on [0, T] x R^{m+d}.
class Field {
public:
    virtual ~Field() = default;
    virtual int d() const = 0;
    virtual Vec value(double s, const Vec& z) const = 0;
    /// d x d Jacobian in the y coordinates.
    virtual Mat grad2(double s, const Vec& z) const = 0;
    /// Upper bound on the Lipschitz constant of y -> u_s(x, y) (operator norm).
    virtual double grad2_bound() const = 0;
};

class AnalyticField : public Field {
public:
    using ValueFn = std::function<Vec(double, const Vec&)>;
    using GradFn = std::function<Mat(double, const Vec&)>;

    AnalyticField(int d, ValueFn value, GradFn grad = {}, double grad_bound = 0.0);

    static AnalyticField zero(int d);
    /// u_s = c (1 - e^{-lambda (T - s)}) / lambda, the fixed point for b = c.
    static AnalyticField constant_drift(const Vec& c, double lambda, double T);

    int d() const override { return d_; }
    Vec value(double s, const Vec& z) const override { return value_(s, z); }
    Mat grad2(double s, const Vec& z) const override;
    double grad2_bound() const override { return grad_bound_; }

private:
    int d_;
    ValueFn value_;
    GradFn grad_;
    double grad_bound_;
};

std::vector<double> uniform_nodes(double lo, double hi, int n);
/// Nodes on [lo, hi] clustered around `center`: spacing near the center is
/// about `fine`, growing geometrically by `ratio` per cell.
std::vector<double> graded_nodes(double lo, double hi, double center, double fine, double ratio = 1.08);

struct GridSpec {
    std::vector<int> axes;  ///< active coordinates of z = (x, y), at most 3
    std::vector<std::vector<double>> nodes;  ///< per active axis, strictly increasing
    std::vector<double> times;  ///< s_0 < ... < s_M, s_M = T
    int gh_points = 6;  ///< Gauss-Hermite points per Gaussian dimension
    int time_points = 6;  ///< Gauss-Legendre points per time panel

    /// Box [lo, hi] on every listed axis, `points` nodes per axis, `n_times` uniform times on [0, T].
    static GridSpec uniform(std::vector<int> axes, double lo, double hi, int points, double T, int n_times);

    double T() const { return times.back(); }
    void validate(int n_state) const;
};

/// Tensor grid of R^d values with multilinear interpolation in the active
/// coordinates and linear interpolation in time. Inactive coordinates are
/// ignored; points outside the box are clamped.
class FieldGrid : public Field {
public:
    FieldGrid(int m, int d, GridSpec spec);

    int d() const override { return d_; }
    int m() const { return m_; }
    int n_state() const { return m_ + d_; }
    const GridSpec& spec() const { return spec_; }
    std::size_t n_points() const { return n_points_; }
    std::size_t n_times() const { return spec_.times.size(); }

    /// Values laid out [time][point][component].
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& mutable_values();
    double at(std::size_t it, std::size_t ip, int c) const {
        return values_[(it * n_points_ + ip) * d_ + c];
    }

    /// Full state vector of spatial node ip (inactive coordinates zero).
    Vec node_state(std::size_t ip) const;
    /// Per-axis node indices of point ip.
    std::vector<int> node_index(std::size_t ip) const;

    Vec value(double s, const Vec& z) const override;
    /// Central differences at the nodes, interpolated like the values.
    Mat grad2(double s, const Vec& z) const override;
    /// Same, flagging points within one cell of the box boundary.
    Mat grad2(double s, const Vec& z, bool* near_boundary) const;
    /// Largest cell slope in the active y directions.
    double grad2_bound() const override;

    /// Central-difference gradient at a node: d x d, zero columns for inactive y.
    Mat node_grad2(std::size_t it, std::size_t ip) const;

    double sup_norm() const;
    /// sup over nodes of the operator norm of node_grad2.
    double grad2_sup() const;

    bool contains(const Vec& z) const;

    std::optional<double> declared_bound;
    /// Throws NumericalError on non-finite values or values above declared_bound.
    void check_invariants() const;

private:
    void refresh() const;

    int m_, d_;
    GridSpec spec_;
    std::size_t n_points_ = 0;
    std::vector<std::size_t> strides_;
    std::vector<int> y_axes_;  ///< positions in spec_.axes that are y coordinates
    std::vector<double> values_;
    mutable std::vector<double> grad_;  ///< [time][point][component][y axis]
    mutable bool dirty_ = true;
};

/// Result of one resolvent evaluation.
struct ResolventResult {
    Vec value;
    double error_estimate = 0.0;
    bool achieved_tol = false;
};

struct ResolventBudget {
    double tol = 1e-8;
    int gh_points = 10;  ///< used when m + d <= 4
    long mc_paths = 20000;  ///< used otherwise
    std::uint64_t seed = 1;
};

using TimeField = std::function<Vec(double r, const Vec& z)>;

/// R^lambda_{s,T} f (z) = int_s^T e^{-lambda (r-s)} P0_{s,r} f_r (z) dr, with
/// r = s + tau^2 and Gauss-Legendre panels graded at the scale 1/sqrt(lambda).
ResolventResult resolvent_apply(const SpectralModel& model, double lambda, const TimeField& f, double s, double T,
                                const Vec& z, const ResolventBudget& budget = {});

struct PicardReport {
    double lambda = 0.0;
    int iterations = 0;
    std::vector<double> residuals;  ///< sup |u^(k) - u^(k-1)|
    std::vector<double> factors;  ///< contraction factors in the norm sup|u| + sup|grad2 u|
    double sup_u = 0.0;
    double sup_grad2 = 0.0;
    bool converged = false;
    bool aborted = false;  ///< stopped by the lambda search after a factor above 1/2
};

struct PicardResult {
    FieldGrid field;
    PicardReport report;
};

/// Fixed-point iteration u <- R^lambda (grad2_b u + b) on the grid. Throws
/// LambdaTooSmall after three consecutive factors >= 1.
PicardResult picard_solve(const SpectralModel& model, const DriftSpec& b, double lambda, const GridSpec& grid,
                          double tol = 1e-10, int max_iter = 60);

struct LambdaSearch {
    double lambda = 0.0;
    std::vector<double> tried;
    PicardResult result;
};

/// Doubles lambda from `start` until the first three contraction factors are
/// <= 1/2 (or the iteration converges before producing three). A trial stops
/// at the first factor above 1/2 among those three.
LambdaSearch find_lambda(const SpectralModel& model, const DriftSpec& b, const GridSpec& grid, double tol = 1e-10,
                         int max_iter = 60, double start = 16.0, double cap = 1048576.0);

/// grad2 of a field at (s, z); prints nothing, but sets *warning when z is
/// within one cell of the box boundary.
Mat field_grad2(const FieldGrid& field, double s, const Vec& z, std::string* warning = nullptr);

/// (x, y + u_s(x, y))
Vec theta_forward(const Field& field, double s, const Vec& z);
/// Solves y + u_s(x, y) = w_2 by fixed-point iteration. Throws NotInvertible when
/// the y-Lipschitz bound of u is >= 1, NumericalError after 200 iterations.
Vec theta_inverse(const Field& field, double s, const Vec& w, double tol = 1e-10, int max_iter = 200);

/// Drift with y-components from index n on set to zero.
DriftSpec project_drift(const DriftSpec& b, int n);

struct GalerkinGap {
    double value_gap = 0.0;
    double grad_gap = 0.0;
    PicardReport small, large;
};

GalerkinGap galerkin_compare(const SpectralModel& model, const DriftSpec& b, double lambda, int n_small, int n_large,
                             const GridSpec& grid, double tol = 1e-10, int max_iter = 60);

/// Max over sampled node pairs of |grad2 u(z) - grad2 u(z')| divided by
/// min_r { r + |z - z'| (1 + int_{r^delta}^1 phi(s)/s ds) }.
double holder_ratio(const FieldGrid& field, double s, const model::Modulus& phi, double delta, long n_pairs,
                    std::uint64_t seed);

}  // namespace degsde::regularization
