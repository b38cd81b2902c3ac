#include "degsde/error.hpp"
#include "degsde/regularization.hpp"
#include "stencil.hpp"

#include <cmath>

namespace degsde::regularization {

AnalyticField::AnalyticField(int d, ValueFn value, GradFn grad, double grad_bound)
    : d_(d), value_(std::move(value)), grad_(std::move(grad)), grad_bound_(grad_bound) {}

AnalyticField AnalyticField::zero(int d) {
    return AnalyticField(d, [d](double, const Vec&) { return Vec::Zero(d).eval(); });
}

AnalyticField AnalyticField::constant_drift(const Vec& c, double lambda, double T) {
    if (!(lambda >= 0)) throw DomainError("constant_drift: lambda must be >= 0");
    return AnalyticField(static_cast<int>(c.size()), [c, lambda, T](double s, const Vec&) {
        const double h = T - s;
        const double f = lambda > 0 ? -std::expm1(-lambda * h) / lambda : h;
        return (c * f).eval();
    });
}

Mat AnalyticField::grad2(double s, const Vec& z) const {
    if (grad_) return grad_(s, z);
    return Mat::Zero(d_, d_);
}

std::vector<double> uniform_nodes(double lo, double hi, int n) {
    if (n < 2 || !(hi > lo)) throw DomainError("uniform_nodes: need n >= 2 and hi > lo");
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = lo + (hi - lo) * i / (n - 1);
    x.back() = hi;
    return x;
}

std::vector<double> graded_nodes(double lo, double hi, double center, double fine, double ratio) {
    if (!(hi > lo) || center < lo || center > hi || !(fine > 0) || !(ratio >= 1))
        throw DomainError("graded_nodes: bad arguments");
    std::vector<double> right{center}, left;
    double h = fine;
    while (right.back() < hi) {
        right.push_back(std::min(hi, right.back() + h));
        h *= ratio;
    }
    if (right.size() > 2 && hi - right[right.size() - 2] < 0.5 * (right[right.size() - 2] - right[right.size() - 3]))
        right.erase(right.end() - 2);
    h = fine;
    double x = center;
    while (x > lo) {
        x = std::max(lo, x - h);
        left.push_back(x);
        h *= ratio;
    }
    if (left.size() > 2 && left[left.size() - 2] - lo < 0.5 * (left[left.size() - 3] - left[left.size() - 2]))
        left.erase(left.end() - 2);
    std::vector<double> out(left.rbegin(), left.rend());
    out.insert(out.end(), right.begin(), right.end());
    return out;
}

GridSpec GridSpec::uniform(std::vector<int> axes, double lo, double hi, int points, double T, int n_times) {
    GridSpec g;
    g.axes = std::move(axes);
    for (std::size_t a = 0; a < g.axes.size(); ++a) g.nodes.push_back(uniform_nodes(lo, hi, points));
    g.times = uniform_nodes(0.0, T, n_times);
    return g;
}

void GridSpec::validate(int n_state) const {
    if (axes.empty() || axes.size() > 3) throw CapabilityError("grid: between 1 and 3 active axes supported");
    if (nodes.size() != axes.size()) throw DomainError("grid: one node array per axis");
    for (std::size_t a = 0; a < axes.size(); ++a) {
        if (axes[a] < 0 || axes[a] >= n_state) throw DomainError("grid: axis out of range");
        for (std::size_t b = 0; b < a; ++b)
            if (axes[b] == axes[a]) throw DomainError("grid: repeated axis");
        if (nodes[a].size() < 3) throw DomainError("grid: need at least 3 nodes per axis");
        for (std::size_t i = 1; i < nodes[a].size(); ++i)
            if (!(nodes[a][i] > nodes[a][i - 1])) throw DomainError("grid: nodes must increase");
    }
    if (times.size() < 2) throw DomainError("grid: need at least 2 time nodes");
    if (times.front() < 0) throw DomainError("grid: times must be >= 0");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw DomainError("grid: times must increase");
    if (gh_points < 1 || gh_points > 40) throw DomainError("grid: gh_points must lie in [1, 40]");
    if (time_points < 2 || time_points > 20) throw DomainError("grid: time_points must lie in [2, 20]");
}

FieldGrid::FieldGrid(int m, int d, GridSpec spec) : m_(m), d_(d), spec_(std::move(spec)) {
    spec_.validate(m + d);
    const int k = static_cast<int>(spec_.axes.size());
    strides_.assign(k, 1);
    n_points_ = 1;
    for (int a = 0; a < k; ++a) {
        strides_[a] = n_points_;
        n_points_ *= spec_.nodes[a].size();
        if (spec_.axes[a] >= m) y_axes_.push_back(a);
    }
    values_.assign(n_times() * n_points_ * d_, 0.0);
}

std::vector<double>& FieldGrid::mutable_values() {
    dirty_ = true;
    return values_;
}

std::vector<int> FieldGrid::node_index(std::size_t ip) const {
    std::vector<int> idx(spec_.axes.size());
    for (std::size_t a = 0; a < idx.size(); ++a) idx[a] = static_cast<int>((ip / strides_[a]) % spec_.nodes[a].size());
    return idx;
}

Vec FieldGrid::node_state(std::size_t ip) const {
    Vec z = Vec::Zero(n_state());
    auto idx = node_index(ip);
    for (std::size_t a = 0; a < idx.size(); ++a) z(spec_.axes[a]) = spec_.nodes[a][idx[a]];
    return z;
}

void FieldGrid::refresh() const {
    if (!dirty_) return;
    const std::size_t ny = y_axes_.size();
    grad_.assign(n_times() * n_points_ * d_ * ny, 0.0);
    for (std::size_t it = 0; it < n_times(); ++it)
        for (std::size_t ip = 0; ip < n_points_; ++ip)
            for (std::size_t q = 0; q < ny; ++q) {
                const int a = y_axes_[q];
                const auto& x = spec_.nodes[a];
                const int n = static_cast<int>(x.size());
                const int i = static_cast<int>((ip / strides_[a]) % n);
                const int lo = i > 0 ? i - 1 : i, hi = i < n - 1 ? i + 1 : i;
                const std::size_t plo = ip - static_cast<std::size_t>(i - lo) * strides_[a];
                const std::size_t phi = ip + static_cast<std::size_t>(hi - i) * strides_[a];
                const double dx = x[hi] - x[lo];
                for (int c = 0; c < d_; ++c)
                    grad_[((it * n_points_ + ip) * d_ + c) * ny + q] = (at(it, phi, c) - at(it, plo, c)) / dx;
            }
    dirty_ = false;
}

Vec FieldGrid::value(double s, const Vec& z) const {
    double coords[3];
    for (std::size_t a = 0; a < spec_.axes.size(); ++a) coords[a] = z(spec_.axes[a]);
    const detail::Stencil st = detail::make_stencil(spec_.nodes, strides_, coords);
    int j;
    double t;
    detail::locate_time(spec_.times, s, j, t);
    Vec out = Vec::Zero(d_);
    for (int q = 0; q < st.n; ++q) {
        const double* v0 = &values_[(j * n_points_ + st.idx[q]) * d_];
        const double* v1 = &values_[((j + 1) * n_points_ + st.idx[q]) * d_];
        for (int c = 0; c < d_; ++c) out(c) += st.w[q] * ((1.0 - t) * v0[c] + t * v1[c]);
    }
    return out;
}

Mat FieldGrid::grad2(double s, const Vec& z) const { return grad2(s, z, nullptr); }

Mat FieldGrid::grad2(double s, const Vec& z, bool* near_boundary) const {
    refresh();
    double coords[3];
    bool edge = false;
    for (std::size_t a = 0; a < spec_.axes.size(); ++a) {
        coords[a] = z(spec_.axes[a]);
        const auto& x = spec_.nodes[a];
        if (coords[a] < x[1] || coords[a] > x[x.size() - 2]) edge = true;
    }
    if (near_boundary) *near_boundary = edge;
    const detail::Stencil st = detail::make_stencil(spec_.nodes, strides_, coords);
    int j;
    double t;
    detail::locate_time(spec_.times, s, j, t);
    const std::size_t ny = y_axes_.size();
    Mat G = Mat::Zero(d_, d_);
    for (int q = 0; q < st.n; ++q) {
        const double* g0 = &grad_[(j * n_points_ + st.idx[q]) * d_ * ny];
        const double* g1 = &grad_[((j + 1) * n_points_ + st.idx[q]) * d_ * ny];
        for (int c = 0; c < d_; ++c)
            for (std::size_t r = 0; r < ny; ++r)
                G(c, spec_.axes[y_axes_[r]] - m_) += st.w[q] * ((1.0 - t) * g0[c * ny + r] + t * g1[c * ny + r]);
    }
    return G;
}

Mat FieldGrid::node_grad2(std::size_t it, std::size_t ip) const {
    refresh();
    const std::size_t ny = y_axes_.size();
    Mat G = Mat::Zero(d_, d_);
    const double* g = &grad_[(it * n_points_ + ip) * d_ * ny];
    for (int c = 0; c < d_; ++c)
        for (std::size_t r = 0; r < ny; ++r) G(c, spec_.axes[y_axes_[r]] - m_) = g[c * ny + r];
    return G;
}

double FieldGrid::grad2_bound() const {
    // Inside a cell the y-derivative of a multilinear interpolant is a convex
    // combination of edge slopes, so the largest edge slope per (component,
    // axis) bounds it; Frobenius over those bounds the operator norm.
    double total = 0.0;
    for (int r : y_axes_) {
        const auto& x = spec_.nodes[r];
        const int n = static_cast<int>(x.size());
        for (int c = 0; c < d_; ++c) {
            double mx = 0.0;
            for (std::size_t it = 0; it < n_times(); ++it)
                for (std::size_t ip = 0; ip < n_points_; ++ip) {
                    const int i = static_cast<int>((ip / strides_[r]) % n);
                    if (i == n - 1) continue;
                    const double slope = (at(it, ip + strides_[r], c) - at(it, ip, c)) / (x[i + 1] - x[i]);
                    mx = std::max(mx, std::abs(slope));
                }
            total += mx * mx;
        }
    }
    return std::sqrt(total);
}

double FieldGrid::sup_norm() const {
    double mx = 0.0;
    for (std::size_t it = 0; it < n_times(); ++it)
        for (std::size_t ip = 0; ip < n_points_; ++ip) {
            double s2 = 0.0;
            for (int c = 0; c < d_; ++c) s2 += at(it, ip, c) * at(it, ip, c);
            mx = std::max(mx, std::sqrt(s2));
        }
    return mx;
}

double FieldGrid::grad2_sup() const {
    double mx = 0.0;
    for (std::size_t it = 0; it < n_times(); ++it)
        for (std::size_t ip = 0; ip < n_points_; ++ip) {
            Mat G = node_grad2(it, ip);
            double nrm = y_axes_.size() <= 1 ? G.norm() : G.jacobiSvd().singularValues()(0);
            mx = std::max(mx, nrm);
        }
    return mx;
}

bool FieldGrid::contains(const Vec& z) const {
    for (std::size_t a = 0; a < spec_.axes.size(); ++a) {
        const double v = z(spec_.axes[a]);
        if (v < spec_.nodes[a].front() || v > spec_.nodes[a].back()) return false;
    }
    return true;
}

void FieldGrid::check_invariants() const {
    for (double v : values_)
        if (!std::isfinite(v)) throw NumericalError("field grid: non-finite value");
    if (declared_bound && sup_norm() > *declared_bound)
        throw NumericalError("field grid: sup-norm above the declared bound");
}

}  // namespace degsde::regularization
