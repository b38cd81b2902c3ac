#include "degsde/bismut.hpp"
#include "degsde/error.hpp"
#include "degsde/kernels.hpp"
#include "degsde/linalg.hpp"
#include "degsde/linear_flow.hpp"
#include "degsde/rng.hpp"

#include <algorithm>
#include <cmath>

namespace degsde::bismut {

namespace {

using linear_flow::kBlock;

// Exact linear paths on a uniform grid, one block at a time.
class PathEngine {
public:
    PathEngine(const SpectralModel& model, double s, double T, int n_steps) : n_(model.n()), k_(model.k()) {
        const double dt = (T - s) / n_steps;
        const int n_laws = model.time_dependent() ? n_steps : 1;
        for (int i = 0; i < n_laws; ++i) {
            linear_flow::StepLaw L = linear_flow::step_law(model, s + i * dt, s + (i + 1) * dt);
            F_.push_back(linear_flow::row_major(L.F));
            noise_.emplace_back(L);
        }
        Z_.resize(n_ * kBlock);
        Znew_.resize(n_ * kBlock);
        dW_.resize(k_ * kBlock);
        eta_.resize(n_ * kBlock);
    }

    void start(const Vec& z, std::size_t nb) {
        nb_ = nb;
        for (int c = 0; c < n_; ++c)
            for (std::size_t p = 0; p < nb; ++p) Z_[c * nb + p] = z(c);
    }

    void step(Rng& rng, int i) {
        const std::size_t li = F_.size() == 1 ? 0 : i;
        noise_[li].draw(rng, nb_, dW_.data(), eta_.data());
        std::copy(eta_.begin(), eta_.begin() + n_ * nb_, Znew_.begin());
        kernels::active().matvec(n_, n_, F_[li].data(), Z_.data(), Znew_.data(), nb_, nb_, true);
        std::swap(Z_, Znew_);
    }

    const double* dW() const { return dW_.data(); }
    Vec state(std::size_t p) const {
        Vec v(n_);
        for (int c = 0; c < n_; ++c) v(c) = Z_[c * nb_ + p];
        return v;
    }
    int k() const { return k_; }

private:
    int n_, k_;
    std::size_t nb_ = 0;
    std::vector<std::vector<double>> F_;
    std::vector<linear_flow::StepNoise> noise_;
    std::vector<double> Z_, Znew_, dW_, eta_;
};

struct Accumulator {
    double sum = 0.0, sumsq = 0.0;
    void finish(GradientEstimate& g, long n) const {
        const double N = static_cast<double>(n);
        g.value = sum / N;
        double var = std::max(0.0, (sumsq - N * g.value * g.value) / std::max(1.0, N - 1));
        g.stderr_ = std::sqrt(var / N);
        g.n_paths = n;
    }
};

void check_args(double s, double T, long n_paths, int n_steps) {
    if (!(T > s)) throw DomainError("bismut: need T > s");
    if (n_paths < 2) throw DomainError("bismut: need at least 2 paths");
    if (n_steps < 1) throw DomainError("bismut: need at least 1 step");
}

}  // namespace

std::vector<std::vector<GradientEstimate>> bismut_gradient_batch(
    const SpectralModel& model, double s, double T, const std::vector<Observable>& fs, const Vec& z,
    const std::vector<Vec>& vs, long n_paths, int n_steps, std::uint64_t seed) {
    check_args(s, T, n_paths, n_steps);
    const std::size_t nf = fs.size(), nv = vs.size();
    std::vector<std::vector<double>> gbar(nv);
    for (std::size_t j = 0; j < nv; ++j) {
        ControlPair c(model, s, T, vs[j]);
        gbar[j] = linear_flow::row_major(c.cell_averages(n_steps));
    }
    PathEngine eng(model, s, T, n_steps);
    const int k = eng.k();
    const auto& K = kernels::active();
    std::vector<std::vector<double>> w(nv, std::vector<double>(kBlock));
    std::vector<std::vector<double>> fv(nf, std::vector<double>(kBlock));
    std::vector<std::vector<Accumulator>> acc(nf, std::vector<Accumulator>(nv));

    const long n_blocks = (n_paths + static_cast<long>(kBlock) - 1) / static_cast<long>(kBlock);
    for (long b = 0; b < n_blocks; ++b) {
        const std::size_t nb = static_cast<std::size_t>(std::min<long>(kBlock, n_paths - b * kBlock));
        Rng rng(seed, "bismut.paths", static_cast<std::uint64_t>(b));
        eng.start(z, nb);
        for (auto& wj : w) std::fill(wj.begin(), wj.end(), 0.0);
        for (int i = 0; i < n_steps; ++i) {
            eng.step(rng, i);
            for (std::size_t j = 0; j < nv; ++j) K.dot_accumulate(k, &gbar[j][i * k], eng.dW(), nb, w[j].data(), nb);
        }
        for (std::size_t p = 0; p < nb; ++p) {
            Vec zt = eng.state(p);
            for (std::size_t a = 0; a < nf; ++a) fv[a][p] = fs[a](zt);
        }
        for (std::size_t a = 0; a < nf; ++a)
            for (std::size_t j = 0; j < nv; ++j) {
                double s1, s2;
                K.product_moments(fv[a].data(), w[j].data(), nb, &s1, &s2);
                acc[a][j].sum += s1;
                acc[a][j].sumsq += s2;
            }
    }
    std::vector<std::vector<GradientEstimate>> out(nf, std::vector<GradientEstimate>(nv));
    for (std::size_t a = 0; a < nf; ++a)
        for (std::size_t j = 0; j < nv; ++j) {
            GradientEstimate& g = out[a][j];
            acc[a][j].finish(g, n_paths);
            g.v = vs[j];
            g.s = s;
            g.T = T;
            g.seed = seed;
        }
    return out;
}

GradientEstimate bismut_gradient(const SpectralModel& model, double s, double T, const Observable& f,
                                 const Vec& z, const Vec& v, long n_paths, int n_steps, std::uint64_t seed) {
    return bismut_gradient_batch(model, s, T, {f}, z, {v}, n_paths, n_steps, seed)[0][0];
}

GradientEstimate bismut_hessian(const SpectralModel& model, double s, double T, const Observable& f,
                                const Vec& z, const Vec& v, const Vec& v_tilde, long n_paths, int n_steps,
                                std::uint64_t seed) {
    check_args(s, T, n_paths, n_steps);
    if (n_steps % 2 != 0) throw DomainError("bismut_hessian: n_steps must be even");
    const double t = 0.5 * (s + T);
    const int half = n_steps / 2;
    // Inner weight on [s, t] for v_tilde; outer weight on [t, T] for the
    // transported direction v_t = e^{(t-s)A} v.
    const Vec vt = linear_flow::flow_matrix(model, t - s) * v;
    std::vector<double> g1 = linear_flow::row_major(ControlPair(model, s, t, v_tilde).cell_averages(half));
    std::vector<double> g2 = linear_flow::row_major(ControlPair(model, t, T, vt).cell_averages(half));
    PathEngine eng(model, s, T, n_steps);
    const int k = eng.k();
    const auto& K = kernels::active();
    std::vector<double> w1(kBlock), w2(kBlock), fv(kBlock);
    Accumulator acc;
    const long n_blocks = (n_paths + static_cast<long>(kBlock) - 1) / static_cast<long>(kBlock);
    for (long b = 0; b < n_blocks; ++b) {
        const std::size_t nb = static_cast<std::size_t>(std::min<long>(kBlock, n_paths - b * kBlock));
        Rng rng(seed, "bismut.paths", static_cast<std::uint64_t>(b));
        eng.start(z, nb);
        std::fill(w1.begin(), w1.end(), 0.0);
        std::fill(w2.begin(), w2.end(), 0.0);
        for (int i = 0; i < n_steps; ++i) {
            eng.step(rng, i);
            if (i < half)
                K.dot_accumulate(k, &g1[i * k], eng.dW(), nb, w1.data(), nb);
            else
                K.dot_accumulate(k, &g2[(i - half) * k], eng.dW(), nb, w2.data(), nb);
        }
        for (std::size_t p = 0; p < nb; ++p) {
            fv[p] = f(eng.state(p));
            w1[p] *= w2[p];
        }
        double s1, s2;
        K.product_moments(fv.data(), w1.data(), nb, &s1, &s2);
        acc.sum += s1;
        acc.sumsq += s2;
    }
    GradientEstimate g;
    acc.finish(g, n_paths);
    g.v = v;
    g.s = s;
    g.T = T;
    g.seed = seed;
    return g;
}

CouplingReport verify_coupling(const SpectralModel& model, double s, double T, const Vec& v, double eps,
                               long n_paths, int n_steps, std::uint64_t seed) {
    if (!(eps >= 0 && eps < 1)) throw DomainError("verify_coupling: eps must lie in [0, 1)");
    check_args(s, T, n_paths, n_steps);
    ControlPair c(model, s, T, v);
    CouplingReport rep;
    rep.gap = eps * coupling_gap(model, c, T);
    rep.terminal_gap = rep.gap.norm();

    Mat gbar = c.cell_averages(n_steps);
    const double dt = (T - s) / n_steps;
    const double energy = gbar.rowwise().squaredNorm().sum() * dt;
    std::vector<double> g = linear_flow::row_major(gbar);
    PathEngine eng(model, s, T, n_steps);
    const int k = eng.k();
    const auto& K = kernels::active();
    std::vector<double> w(kBlock), R(kBlock);
    double sum = 0.0, sumsq = 0.0;
    const long n_blocks = (n_paths + static_cast<long>(kBlock) - 1) / static_cast<long>(kBlock);
    for (long b = 0; b < n_blocks; ++b) {
        const std::size_t nb = static_cast<std::size_t>(std::min<long>(kBlock, n_paths - b * kBlock));
        Rng rng(seed, "bismut.paths", static_cast<std::uint64_t>(b));
        eng.start(Vec::Zero(model.n()), nb);
        std::fill(w.begin(), w.end(), 0.0);
        for (int i = 0; i < n_steps; ++i) {
            eng.step(rng, i);
            K.dot_accumulate(k, &g[i * k], eng.dW(), nb, w.data(), nb);
        }
        for (std::size_t p = 0; p < nb; ++p) R[p] = std::exp(eps * w[p] - 0.5 * eps * eps * energy);
        double s1, s2;
        K.moments(R.data(), nb, &s1, &s2);
        sum += s1;
        sumsq += s2;
    }
    const double N = static_cast<double>(n_paths);
    rep.girsanov_mean.value = sum / N;
    double var = std::max(0.0, (sumsq - N * rep.girsanov_mean.value * rep.girsanov_mean.value) / (N - 1));
    rep.girsanov_mean.stderr_ = std::sqrt(var / N);
    rep.girsanov_mean.n = n_paths;
    return rep;
}

std::vector<Vec> probe_points(int n, int count) {
    static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
    if (n > 16) throw CapabilityError("probe_points: dimension above 16");
    std::vector<Vec> out{Vec::Zero(n)};
    auto radical_inverse = [](int i, int base) {
        double f = 1.0, r = 0.0;
        while (i > 0) {
            f /= base;
            r += f * (i % base);
            i /= base;
        }
        return r;
    };
    for (int i = 1; static_cast<int>(out.size()) < count && i < 100000; ++i) {
        Vec x(n);
        for (int c = 0; c < n; ++c) x(c) = 2.0 * (2.0 * radical_inverse(i, primes[c]) - 1.0);
        if (x.norm() <= 2.0) out.push_back(x);
    }
    return out;
}

ScalingResult scaling_exponent(const SpectralModel& model, const Observable& f, Component component,
                               const std::vector<double>& gaps, const ScalingBudget& budget) {
    if (gaps.size() < 4) throw DomainError("scaling_exponent: need at least 4 gaps");
    const int m = model.m(), d = model.d(), n = model.n();
    std::vector<Vec> dirs;
    const int lo = component == Component::x ? 0 : m;
    const int cnt = component == Component::x ? m : d;
    for (int j = 0; j < cnt; ++j) dirs.push_back(Vec::Unit(n, lo + j));
    const std::vector<Vec> probes = probe_points(n, 8);

    ScalingResult out;
    out.gaps = gaps;
    for (std::size_t gi = 0; gi < gaps.size(); ++gi) {
        double best = -1.0, best_rel = 0.0;
        for (std::size_t pi = 0; pi < probes.size(); ++pi) {
            std::uint64_t seed = substream_seed(budget.seed, "bismut.scaling", gi * 64 + pi);
            auto est = bismut_gradient_batch(model, 0.0, gaps[gi], {f}, probes[pi], dirs, budget.n_paths,
                                             budget.n_steps, seed)[0];
            for (const auto& e : est) {
                if (std::abs(e.value) > best) {
                    best = std::abs(e.value);
                    best_rel = best > 0 ? e.stderr_ / best : INFINITY;
                }
            }
        }
        out.sup_grad.push_back(best);
        out.rel_stderr.push_back(best_rel);
        if (best_rel > 0.25) out.wide_confidence = true;
    }
    // Weighted least squares of log sup vs log gap; weights from the relative errors.
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        if (!(out.sup_grad[i] > 0)) {
            out.wide_confidence = true;
            continue;
        }
        double var = std::max(out.rel_stderr[i] * out.rel_stderr[i], 1e-8);
        double w = 1.0 / var;
        double x = std::log(gaps[i]), y = std::log(out.sup_grad[i]);
        sw += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    double den = sw * sxx - sx * sx;
    out.slope = den != 0 ? (sw * sxy - sx * sy) / den : 0.0;
    out.slope_stderr = den > 0 ? std::sqrt(sw / den) : INFINITY;
    if (out.wide_confidence) out.warning = "relative standard error above 0.25 at some gap; increase n_paths";
    return out;
}

}  // namespace degsde::bismut
