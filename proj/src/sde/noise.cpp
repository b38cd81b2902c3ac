#include "degsde/error.hpp"
#include "degsde/linear_flow.hpp"
#include "degsde/rng.hpp"
#include "degsde/sde.hpp"

namespace degsde::sde {

NoiseRecord NoiseRecord::draw(const SpectralModel& model, double s, double T, int n_steps, std::uint64_t seed,
                              std::uint64_t path) {
    if (n_steps < 1) throw DomainError("noise: n_steps must be >= 1");
    if (!(T > s)) throw DomainError("noise: need T > s");
    NoiseRecord r;
    r.s = s;
    r.T = T;
    r.n_steps = n_steps;
    r.k = model.k();
    r.n = model.n();
    r.seed = seed;
    r.path = path;
    r.dW.resize(static_cast<std::size_t>(n_steps) * r.k);
    r.eta.resize(static_cast<std::size_t>(n_steps) * r.n);
    const double h = (T - s) / n_steps;
    Rng rng(seed, "sde.noise", path);
    std::optional<linear_flow::StepNoise> fixed;
    if (!model.time_dependent()) fixed.emplace(linear_flow::step_law(model, s, s + h));
    for (int i = 0; i < n_steps; ++i) {
        if (fixed) {
            fixed->draw(rng, 1, &r.dW[static_cast<std::size_t>(i) * r.k], &r.eta[static_cast<std::size_t>(i) * r.n]);
        } else {
            linear_flow::StepNoise sn(linear_flow::step_law(model, s + i * h, s + (i + 1) * h));
            sn.draw(rng, 1, &r.dW[static_cast<std::size_t>(i) * r.k], &r.eta[static_cast<std::size_t>(i) * r.n]);
        }
    }
    return r;
}

NoiseRecord NoiseRecord::coarsen(const SpectralModel& model, int factor) const {
    if (factor < 1 || (factor & (factor - 1)) != 0 || n_steps % factor != 0)
        throw DomainError("noise: coarsening factor must be a power of two dividing n_steps");
    NoiseRecord cur = *this;
    while (factor > 1) {
        const Mat F = linear_flow::flow_matrix(model, cur.h());
        NoiseRecord next = cur;
        next.n_steps = cur.n_steps / 2;
        next.dW.assign(static_cast<std::size_t>(next.n_steps) * k, 0.0);
        next.eta.assign(static_cast<std::size_t>(next.n_steps) * n, 0.0);
        for (int i = 0; i < next.n_steps; ++i) {
            for (int c = 0; c < k; ++c)
                next.dW[static_cast<std::size_t>(i) * k + c] = cur.dW_at(2 * i)[c] + cur.dW_at(2 * i + 1)[c];
            Eigen::Map<const Vec> e1(cur.eta_at(2 * i), n), e2(cur.eta_at(2 * i + 1), n);
            Eigen::Map<Vec> out(&next.eta[static_cast<std::size_t>(i) * n], n);
            out = F * e1 + e2;
        }
        cur = std::move(next);
        factor /= 2;
    }
    return cur;
}

}  // namespace degsde::sde
