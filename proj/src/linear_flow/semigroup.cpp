#include "degsde/error.hpp"
#include "degsde/linalg.hpp"
#include "degsde/linear_flow.hpp"
#include "degsde/quadrature.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace degsde::linear_flow {

namespace {

// Calls visit(point, weight) for every node of the tensor Gauss-Hermite rule
// attached to the law.
template <class Visit>
void for_each_gh_node(const GaussianLaw& law, int points, Visit&& visit) {
    Mat L = linalg::psd_factor(law.cov);
    const int r = static_cast<int>(L.cols());
    quad::Rule rule = quad::gauss_hermite(points);
    std::vector<int> idx(r, 0);
    Vec x(r);
    while (true) {
        double w = 1.0;
        for (int j = 0; j < r; ++j) {
            x(j) = rule.nodes[idx[j]];
            w *= rule.weights[idx[j]];
        }
        Vec pt = r ? Vec(law.mean + L * x) : law.mean;
        visit(pt, w);
        int j = 0;
        while (j < r && ++idx[j] == points) idx[j++] = 0;
        if (j == r) break;
    }
}

}  // namespace

double expect_gh(const GaussianLaw& law, const Observable& f, int points) {
    double sum = 0.0;
    for_each_gh_node(law, points, [&](const Vec& z, double w) { sum += w * f(z); });
    return sum;
}

Vec expect_gh(const GaussianLaw& law, const VectorObservable& f, int points) {
    Vec sum;
    for_each_gh_node(law, points, [&](const Vec& z, double w) {
        Vec v = f(z);
        if (sum.size() == 0) sum = Vec::Zero(v.size());
        sum += w * v;
    });
    return sum;
}

Estimate apply_P0(const SpectralModel& model, double s, double t, const Observable& f, const Vec& z,
                  P0Method method, const P0Budget& budget) {
    GaussianLaw law = transition_law(model, s, t, z);
    Estimate e;
    if (method == P0Method::gauss_hermite) {
        if (model.n() > 4)
            throw CapabilityError("apply_P0: Gauss-Hermite tensor rule limited to total dimension 4 (got " +
                                  std::to_string(model.n()) + ")");
        e.value = expect_gh(law, f, budget.gh_points);
        e.n = budget.gh_points;
        return e;
    }
    if (budget.n_paths < 2) throw DomainError("apply_P0: Monte Carlo needs at least 2 paths");
    Mat L = linalg::psd_factor(law.cov);
    const int r = static_cast<int>(L.cols());
    double sum = 0.0, sumsq = 0.0;
    Vec xi(r);
    const long n_blocks = (budget.n_paths + kBlock - 1) / kBlock;
    for (long b = 0; b < n_blocks; ++b) {
        Rng rng(budget.seed, "linear_flow.apply_P0", b);
        long nb = std::min<long>(kBlock, budget.n_paths - b * kBlock);
        for (long p = 0; p < nb; ++p) {
            for (int j = 0; j < r; ++j) xi(j) = rng.normal();
            double v = f(r ? Vec(law.mean + L * xi) : law.mean);
            sum += v;
            sumsq += v * v;
        }
    }
    const double N = static_cast<double>(budget.n_paths);
    e.value = sum / N;
    double var = std::max(0.0, (sumsq - N * e.value * e.value) / (N - 1));
    e.stderr_ = std::sqrt(var / N);
    e.n = budget.n_paths;
    return e;
}

double hurwitz_tail(double p, long a) {
    if (!(p > 1)) throw DomainError("hurwitz_tail: need p > 1");
    if (a < 1) throw DomainError("hurwitz_tail: need a >= 1");
    const long M = a + 64;
    double sum = 0.0;
    for (long i = a; i < M; ++i) sum += std::pow(static_cast<double>(i), -p);
    // Euler-Maclaurin for sum_{i >= M} i^{-p}.
    double x = static_cast<double>(M);
    sum += std::pow(x, 1 - p) / (p - 1) + 0.5 * std::pow(x, -p) + p * std::pow(x, -p - 1) / 12.0 -
           p * (p + 1) * (p + 2) * std::pow(x, -p - 3) / 720.0;
    return sum;
}

HsNoiseReport hs_noise_integral(const SpectralModel& model, double s, double t) {
    if (!model.is_spectral()) throw CapabilityError("hs_noise_integral: model is not of spectral type");
    if (!(t > s)) throw DomainError("hs_noise_integral: need t > s");
    const int d = model.d();
    const Vec lam = model.eigenvalues();
    const double delta = model.delta;

    // Per-mode c1_i = sup_r |sigma_r row i|^2 over sampled r; global c1 = sup ||sigma_r||^2.
    Vec c1i = Vec::Zero(d);
    double c1 = 0.0;
    const int samples = model.time_dependent() ? 9 : 1;
    for (int j = 0; j < samples; ++j) {
        double r = samples == 1 ? s : s + (t - s) * j / (samples - 1);
        Mat sg = model.sigma_at(r);
        for (int i = 0; i < d; ++i) c1i(i) = std::max(c1i(i), sg.row(i).squaredNorm());
        Eigen::JacobiSVD<Mat> svd(sg);
        c1 = std::max(c1, svd.singularValues().size() ? std::pow(svd.singularValues()(0), 2) : 0.0);
    }

    auto truncated = [&](double h) {
        double v = 0.0;
        if (!model.time_dependent()) {
            for (int i = 0; i < d; ++i) v += model.sigma.row(i).squaredNorm() * exp_moment(0, 2 * lam(i), h);
        } else {
            for (int i = 0; i < d; ++i)
                v += quad::integrate_scalar(
                    [&](double r) { return std::exp(-2 * lam(i) * (s + h - r)) * model.sigma_at(r).row(i).squaredNorm(); },
                    s, s + h, 1e-14);
        }
        return v;
    };
    auto tail_value = [&](double h) {
        if (!model.tail) return 0.0;
        const auto& tr = *model.tail;
        double v = 0.0;
        long i = d + 1;
        for (;; ++i) {
            double l = tr.coeff * std::pow(static_cast<double>(i), tr.power);
            if (2 * l * h > 40) break;
            v += exp_moment(0, 2 * l, h);
        }
        // Remaining modes are saturated: (1 - e^{-2 lambda h}) / (2 lambda) = 1/(2 lambda) to 1e-17.
        v += hurwitz_tail(tr.power, i) / (2 * tr.coeff);
        return c1 * v;
    };

    HsNoiseReport rep;
    const double h = t - s;
    rep.c1 = c1;
    rep.value = truncated(h);
    rep.value_with_tail = rep.value + tail_value(h);
    double sum = 0.0;
    for (int i = 0; i < d; ++i) sum += c1i(i) * std::pow(lam(i), delta - 1);
    if (model.tail) {
        const auto& tr = *model.tail;
        double p = tr.power * (1 - delta);
        if (!(p > 1)) throw HypothesisViolation("H3", "tail sum of lambda_i^{delta-1} diverges");
        sum += c1 * std::pow(tr.coeff, delta - 1) * hurwitz_tail(p, d + 1);
    }
    rep.bound_c2 = std::pow(2.0, delta - 1) * sum;
    rep.bound = rep.bound_c2 * std::pow(h, delta);

    // Least-squares slope of log value vs log gap.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (int e = 8; e >= 3; --e) {
        double g = std::ldexp(1.0, -e);
        double v = truncated(g) + tail_value(g);
        if (!(v > 0)) continue;
        double x = std::log(g), y = std::log(v);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++cnt;
    }
    rep.exponent_check = cnt >= 2 ? (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx) : 0.0;
    return rep;
}

}  // namespace degsde::linear_flow
