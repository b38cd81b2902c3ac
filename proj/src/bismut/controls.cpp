#include "degsde/bismut.hpp"
#include "degsde/error.hpp"
#include "degsde/linalg.hpp"
#include "degsde/quadrature.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace degsde::bismut {

ControlPair::ControlPair(const SpectralModel& model, double s, double T, const Vec& v)
    : A0_(model.A0), A2_(model.A2), B_(model.B), sigma_(model.sigma), sigma_fn_(model.sigma_fn), s_(s), T_(T), v_(v) {
    if (!(T > s)) throw DomainError("perturbation_controls: need T > s");
    if (v.size() != model.n()) throw DomainError("perturbation_controls: direction has wrong dimension");
    const int m = model.m(), d = model.d();
    const double h = T - s;
    const Vec v1 = v.head(m), v2 = v.tail(d);
    // Terminal coincidence of the x-difference needs e^{(r-s)A0} here (the
    // adjoint appears only inside Phi).
    Vec rhs = v1;
    if (!v2.isZero(0.0)) {
        const Vec Bv2 = B_ * v2;
        auto f = [&](double u) { return Mat(((h - u) / h) * (linalg::expm(u * A0_) * Bv2)); };
        rhs += quad::integrate(f, 0.0, h).value.col(0);
    }
    GramianResult g = gramian_Q(model, h);
    V_ = g.Q.partialPivLu().solve(rhs);
}

Vec ControlPair::phi(double r) const {
    const double u = r - s_, h = T_ - s_;
    const int d = static_cast<int>(A2_.rows());
    const Vec v2 = v_.tail(d);
    Mat E0t = linalg::expm(u * A0_.transpose());
    // d/dr {(r-s)(T-r) B^T e^{(r-s)A0^T}} expanded by the product rule.
    Mat D = (T_ + s_ - 2 * r) * B_.transpose() * E0t + u * (T_ - r) * B_.transpose() * A0_.transpose() * E0t;
    Vec inner = v2 / h + D * V_;
    return linalg::expm(u * A2_) * inner;
}

Vec ControlPair::weight_integrand(double r) const {
    Mat sg = sigma_fn_ ? sigma_fn_(r) : sigma_;
    Mat S = sg * sg.transpose();
    Eigen::LDLT<Mat> ldlt(S);
    if (ldlt.info() != Eigen::Success || !(linalg::min_singular_value(S) >= 1e-10))
        throw HypothesisViolation("H1", "sigma sigma^T is singular at r = " + std::to_string(r));
    return sg.transpose() * ldlt.solve(phi(r));
}

Mat ControlPair::cell_averages(int n_steps) const {
    if (n_steps < 1) throw DomainError("cell_averages: n_steps must be >= 1");
    static const quad::Rule gl = quad::gauss_legendre(3);
    const double dt = (T_ - s_) / n_steps;
    Vec probe = weight_integrand(s_);
    Mat out(n_steps, probe.size());
    for (int j = 0; j < n_steps; ++j) {
        double a = s_ + j * dt;
        Vec acc = Vec::Zero(probe.size());
        for (std::size_t q = 0; q < gl.nodes.size(); ++q)
            acc += 0.5 * gl.weights[q] * weight_integrand(a + 0.5 * dt * (1 + gl.nodes[q]));
        out.row(j) = acc.transpose();
    }
    return out;
}

ControlPair perturbation_controls(const SpectralModel& model, double s, double T, const Vec& v) {
    return ControlPair(model, s, T, v);
}

Vec coupling_gap(const SpectralModel& model, const ControlPair& c, double t) {
    const int m = model.m(), d = model.d();
    const double s = c.s();
    const Vec v1 = c.v().head(m), v2 = c.v().tail(d);
    quad::AdaptiveOptions opt;
    opt.abs_tol = 1e-15;
    opt.rel_tol = 1e-13;
    auto ygap = [&](double r) -> Vec {
        Vec y = linalg::expm((r - s) * model.A2) * v2;
        if (r > s) {
            auto f = [&](double q) { return Mat(linalg::expm((r - q) * model.A2) * c.phi(q)); };
            y -= quad::integrate(f, s, r, opt).value.col(0);
        }
        return y;
    };
    Vec out(m + d);
    out.tail(d) = ygap(t);
    Vec x = linalg::expm((t - s) * model.A1) * v1;
    if (t > s) {
        auto g = [&](double r) { return Mat(linalg::expm((t - r) * model.A1) * model.B * ygap(r)); };
        x += quad::integrate(g, s, t, opt).value.col(0);
    }
    out.head(m) = x;
    return out;
}

VarianceBound variance_bound_check(const SpectralModel& model, double s, double T, const Vec& v) {
    if (!(T > s)) throw DomainError("variance_bound_check: need T > s");
    const int m = model.m();
    const double n1 = v.head(m).squaredNorm(), n2 = v.tail(model.d()).squaredNorm();
    auto ratio_at = [&](double h, double* energy) {
        ControlPair c(model, s, s + h, v);
        double e = quad::integrate_scalar([&](double r) { return c.weight_integrand(r).squaredNorm(); }, s, s + h,
                                          1e-13);
        if (energy) *energy = e;
        double denom = n1 / (h * h * h) + n2 / h;
        return denom > 0 ? e / denom : 0.0;
    };
    VarianceBound out;
    out.ratio = ratio_at(T - s, &out.energy);
    for (int j = 0; j <= 6; ++j) {
        double h = (T - s) * std::ldexp(1.0, -j);
        double r = ratio_at(h, nullptr);
        out.gaps.push_back(h);
        out.ratios.push_back(r);
        out.sup = std::max(out.sup, r);
    }
    return out;
}

}  // namespace degsde::bismut
