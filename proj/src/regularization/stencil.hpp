#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace degsde::regularization::detail {

// Corners and weights of the multilinear interpolant at one point.
struct Stencil {
    std::size_t idx[8];
    double w[8];
    int n = 0;
};

// Cell j with nodes[j] <= v <= nodes[j+1] and the weight of nodes[j+1];
// v is clamped into the box.
inline void locate(const std::vector<double>& nodes, double v, int& j, double& t) {
    const int n = static_cast<int>(nodes.size());
    if (v <= nodes.front()) {
        j = 0;
        t = 0.0;
        return;
    }
    if (v >= nodes.back()) {
        j = n - 2;
        t = 1.0;
        return;
    }
    j = static_cast<int>(std::upper_bound(nodes.begin(), nodes.end(), v) - nodes.begin()) - 1;
    j = std::clamp(j, 0, n - 2);
    t = (v - nodes[j]) / (nodes[j + 1] - nodes[j]);
}

inline Stencil make_stencil(const std::vector<std::vector<double>>& nodes, const std::vector<std::size_t>& strides,
                            const double* coords) {
    Stencil st;
    const int k = static_cast<int>(nodes.size());
    int j[3];
    double t[3];
    for (int a = 0; a < k; ++a) locate(nodes[a], coords[a], j[a], t[a]);
    st.n = 1 << k;
    for (int c = 0; c < st.n; ++c) {
        std::size_t idx = 0;
        double w = 1.0;
        for (int a = 0; a < k; ++a) {
            const int bit = (c >> a) & 1;
            idx += static_cast<std::size_t>(j[a] + bit) * strides[a];
            w *= bit ? t[a] : 1.0 - t[a];
        }
        st.idx[c] = idx;
        st.w[c] = w;
    }
    return st;
}

// locate() with O(1) arithmetic on uniform axes.
class AxisLocator {
public:
    explicit AxisLocator(const std::vector<double>& nodes) : nodes_(&nodes) {
        const int n = static_cast<int>(nodes.size());
        lo_ = nodes.front();
        hi_ = nodes.back();
        const double dx = (hi_ - lo_) / (n - 1);
        uniform_ = true;
        for (int i = 0; i < n; ++i)
            if (std::abs(nodes[i] - (lo_ + i * dx)) > 1e-12 * (hi_ - lo_)) uniform_ = false;
        inv_dx_ = 1.0 / dx;
        last_ = n - 2;
    }
    void operator()(double v, int& j, double& t) const {
        if (!uniform_) {
            locate(*nodes_, v, j, t);
            return;
        }
        if (v <= lo_) {
            j = 0;
            t = 0.0;
            return;
        }
        if (v >= hi_) {
            j = last_;
            t = 1.0;
            return;
        }
        const double f = (v - lo_) * inv_dx_;
        j = std::min(static_cast<int>(f), last_);
        t = f - j;
    }

private:
    const std::vector<double>* nodes_;
    double lo_, hi_, inv_dx_;
    int last_;
    bool uniform_;
};

inline Stencil make_stencil(const std::vector<AxisLocator>& axes, const std::vector<std::size_t>& strides,
                            const double* coords) {
    Stencil st;
    const int k = static_cast<int>(axes.size());
    int j[3];
    double t[3];
    for (int a = 0; a < k; ++a) axes[a](coords[a], j[a], t[a]);
    st.n = 1 << k;
    for (int c = 0; c < st.n; ++c) {
        std::size_t idx = 0;
        double w = 1.0;
        for (int a = 0; a < k; ++a) {
            const int bit = (c >> a) & 1;
            idx += static_cast<std::size_t>(j[a] + bit) * strides[a];
            w *= bit ? t[a] : 1.0 - t[a];
        }
        st.idx[c] = idx;
        st.w[c] = w;
    }
    return st;
}

// Time node bracket: r in [times[j], times[j+1]], weight t of times[j+1].
inline void locate_time(const std::vector<double>& times, double r, int& j, double& t) {
    if (times.size() == 1) {
        j = 0;
        t = 0.0;
        return;
    }
    locate(times, r, j, t);
}

}  // namespace degsde::regularization::detail
