#include "degsde/error.hpp"
#include "degsde/regularization.hpp"
#include "degsde/rng.hpp"

#include <cmath>

namespace degsde::regularization {

Mat field_grad2(const FieldGrid& field, double s, const Vec& z, std::string* warning) {
    bool edge = false;
    Mat G = field.grad2(s, z, &edge);
    if (warning) *warning = edge ? "point within one cell of the grid boundary; one-sided differences used" : "";
    return G;
}

Vec theta_forward(const Field& field, double s, const Vec& z) {
    const int d = field.d();
    Vec w = z;
    w.tail(d) += field.value(s, z);
    return w;
}

Vec theta_inverse(const Field& field, double s, const Vec& w, double tol, int max_iter) {
    const double L = field.grad2_bound();
    if (!(L < 1.0))
        throw NotInvertible("theta_inverse: y-Lipschitz bound of u is " + std::to_string(L) + " (needs < 1)");
    const int d = field.d();
    Vec z = w;
    for (int it = 0; it < max_iter; ++it) {
        Vec ynew = w.tail(d) - field.value(s, z);
        const double step = (ynew - z.tail(d)).lpNorm<Eigen::Infinity>();
        z.tail(d) = ynew;
        if (step <= tol) return z;
    }
    throw NumericalError("theta_inverse: no convergence in " + std::to_string(max_iter) + " iterations");
}

DriftSpec project_drift(const DriftSpec& b, int n) {
    if (n < 0 || n > b.d) throw DomainError("project_drift: level out of range");
    DriftSpec out = b;
    out.name = b.name + "_n" + std::to_string(n);
    auto inner = b.eval;
    const int d = b.d;
    out.eval = [inner, n, d](double t, const Vec& x, const Vec& y) {
        Vec v = inner(t, x, y);
        v.tail(d - n).setZero();
        return v;
    };
    return out;
}

GalerkinGap galerkin_compare(const SpectralModel& model, const DriftSpec& b, double lambda, int n_small, int n_large,
                             const GridSpec& grid, double tol, int max_iter) {
    if (!model.is_spectral()) throw CapabilityError("galerkin_compare: model is not of spectral form");
    if (!(n_small >= 1 && n_small < n_large && n_large <= model.d()))
        throw DomainError("galerkin_compare: need 1 <= n_small < n_large <= d");
    PicardResult s = picard_solve(model, project_drift(b, n_small), lambda, grid, tol, max_iter);
    PicardResult l = picard_solve(model, project_drift(b, n_large), lambda, grid, tol, max_iter);
    GalerkinGap out;
    out.small = s.report;
    out.large = l.report;
    const int d = model.d();
    for (std::size_t it = 0; it < s.field.n_times(); ++it)
        for (std::size_t ip = 0; ip < s.field.n_points(); ++ip) {
            double v2 = 0.0;
            for (int c = 0; c < d; ++c) {
                const double e = s.field.at(it, ip, c) - l.field.at(it, ip, c);
                v2 += e * e;
            }
            out.value_gap = std::max(out.value_gap, std::sqrt(v2));
            out.grad_gap = std::max(out.grad_gap, (s.field.node_grad2(it, ip) - l.field.node_grad2(it, ip)).norm());
        }
    return out;
}

double holder_ratio(const FieldGrid& field, double s, const model::Modulus& phi, double delta, long n_pairs,
                    std::uint64_t seed) {
    if (!(delta > 0 && delta <= 1)) throw DomainError("holder_ratio: delta must lie in (0, 1]");
    std::vector<double> rs, I;
    for (int i = 0; i <= 48; ++i) {
        const double r = std::pow(10.0, -12.0 + 12.0 * i / 48.0);
        rs.push_back(r);
        I.push_back(i == 48 ? 0.0 : model::dini_integral(phi, std::pow(r, delta)));
    }
    Rng rng(seed, "regularization.holder", 0);
    const std::size_t np = field.n_points();
    double worst = 0.0;
    for (long p = 0; p < n_pairs; ++p) {
        const std::size_t i = static_cast<std::size_t>(rng.uniform() * np) % np;
        const std::size_t j = static_cast<std::size_t>(rng.uniform() * np) % np;
        if (i == j) continue;
        const Vec zi = field.node_state(i), zj = field.node_state(j);
        const double dist = (zi - zj).norm();
        double env = INFINITY;
        for (std::size_t q = 0; q < rs.size(); ++q) env = std::min(env, rs[q] + dist * (1.0 + I[q]));
        const double num = (field.grad2(s, zi) - field.grad2(s, zj)).norm();
        worst = std::max(worst, num / env);
    }
    return worst;
}

}  // namespace degsde::regularization
