#include "degsde/quadrature.hpp"

#include "degsde/error.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>

namespace degsde::quad {

namespace {

template <unsigned N>
Rule legendre_from_boost() {
    using G = boost::math::quadrature::gauss<double, N>;
    const auto& x = G::abscissa();
    const auto& w = G::weights();
    Rule r;
    // Boost stores the nonnegative half; mirror it.
    for (std::size_t i = x.size(); i-- > 0;) {
        if (x[i] == 0.0) continue;
        r.nodes.push_back(-x[i]);
        r.weights.push_back(w[i]);
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        r.nodes.push_back(x[i]);
        r.weights.push_back(w[i]);
    }
    return r;
}

Rule golub_welsch(int n, const std::function<double(int)>& offdiag, double mu0) {
    Mat J = Mat::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        J(k, k - 1) = J(k - 1, k) = offdiag(k);
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(J);
    Rule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        r.nodes[i] = es.eigenvalues()(i);
        double v0 = es.eigenvectors()(0, i);
        r.weights[i] = mu0 * v0 * v0;
    }
    return r;
}

// Kronrod 15 / Gauss 7 nodes on [-1,1] shared by every adaptive call.
struct GK15 {
    std::vector<double> x;   // 15 nodes
    std::vector<double> wk;  // Kronrod weights
    std::vector<double> wg;  // Gauss weights (0 on Kronrod-only nodes)
    GK15() {
        using K = boost::math::quadrature::gauss_kronrod<double, 15>;
        using G = boost::math::quadrature::gauss<double, 7>;
        const auto& kx = K::abscissa();
        const auto& kw = K::weights();
        const auto& gw = G::weights();
        // Kronrod index 2j coincides with Gauss index j.
        auto gauss_weight = [&](std::size_t i) { return i % 2 == 0 ? gw[i / 2] : 0.0; };
        for (std::size_t i = kx.size(); i-- > 1;) {
            x.push_back(-kx[i]);
            wk.push_back(kw[i]);
            wg.push_back(gauss_weight(i));
        }
        for (std::size_t i = 0; i < kx.size(); ++i) {
            x.push_back(kx[i]);
            wk.push_back(kw[i]);
            wg.push_back(gauss_weight(i));
        }
    }
};

const GK15& gk15() {
    static const GK15 rule;
    return rule;
}

struct Panel {
    Mat k, g;
};

Panel eval_panel(const std::function<Mat(double)>& f, double a, double b) {
    const GK15& r = gk15();
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    Panel p;
    for (std::size_t i = 0; i < r.x.size(); ++i) {
        Mat v = f(c + h * r.x[i]);
        if (i == 0) {
            p.k = Mat::Zero(v.rows(), v.cols());
            p.g = Mat::Zero(v.rows(), v.cols());
        }
        p.k += (h * r.wk[i]) * v;
        if (r.wg[i] != 0.0) p.g += (h * r.wg[i]) * v;
    }
    return p;
}

void adapt(const std::function<Mat(double)>& f, double a, double b, const Panel& p,
           double tol, int depth, const AdaptiveOptions& opt, MatResult& out) {
    double err = (p.k - p.g).cwiseAbs().maxCoeff();
    if (err <= tol || depth >= opt.max_depth || !(err == err)) {
        out.value += p.k;
        out.error += err;
        if (err > tol) out.converged = false;
        return;
    }
    double m = 0.5 * (a + b);
    Panel l = eval_panel(f, a, m), r = eval_panel(f, m, b);
    adapt(f, a, m, l, 0.5 * tol, depth + 1, opt, out);
    adapt(f, m, b, r, 0.5 * tol, depth + 1, opt, out);
}

}  // namespace

Rule gauss_legendre(int n) {
    switch (n) {
        case 3: return legendre_from_boost<3>();
        case 4: return legendre_from_boost<4>();
        case 5: return legendre_from_boost<5>();
        case 7: return legendre_from_boost<7>();
        case 8: return legendre_from_boost<8>();
        case 10: return legendre_from_boost<10>();
        case 15: return legendre_from_boost<15>();
        case 20: return legendre_from_boost<20>();
        default: break;
    }
    if (n < 1) throw DomainError("gauss_legendre: n must be >= 1");
    return golub_welsch(n, [](int k) { return k / std::sqrt(4.0 * k * k - 1.0); }, 2.0);
}

Rule gauss_hermite(int n) {
    if (n < 1) throw DomainError("gauss_hermite: n must be >= 1");
    // Probabilists' Hermite recurrence: off-diagonal sqrt(k), total mass 1.
    return golub_welsch(n, [](int k) { return std::sqrt(static_cast<double>(k)); }, 1.0);
}

MatResult integrate(const std::function<Mat(double)>& f, double a, double b,
                    const AdaptiveOptions& opt) {
    if (!(b > a)) throw DomainError("integrate: need b > a");
    Panel p = eval_panel(f, a, b);
    double scale = p.k.cwiseAbs().maxCoeff();
    double tol = std::max(opt.abs_tol, opt.rel_tol * scale);
    MatResult out;
    out.value = Mat::Zero(p.k.rows(), p.k.cols());
    adapt(f, a, b, p, tol, 0, opt, out);
    return out;
}

double integrate_scalar(const std::function<double(double)>& f, double a, double b, double tol,
                        double* error) {
    double err = 0.0;
    // Depth 15 bounds the work when tol sits below the rounding floor of the
    // error estimate; the Kronrod value is accurate long before that.
    double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 15, tol, &err);
    if (error) *error = err;
    return v;
}

}  // namespace degsde::quad
