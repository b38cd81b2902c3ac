#include "degsde/error.hpp"
#include "degsde/linalg.hpp"
#include "degsde/linear_flow.hpp"
#include "degsde/rng.hpp"
#include "degsde/sde.hpp"

#include <cmath>

namespace degsde::sde {

MildTrajectory integrate_mild(const SpectralModel& model, const DriftSpec& b, const Vec& z0,
                              const NoiseRecord& noise) {
    const int n = model.n(), m = model.m(), d = model.d();
    if (z0.size() != n) throw DomainError("integrate_mild: initial state has the wrong dimension");
    if (noise.n != n || noise.k != model.k()) throw DomainError("integrate_mild: noise record does not match the model");
    if (b.m != m || b.d != d) throw DomainError("integrate_mild: drift dimensions do not match the model");
    const double h = noise.h();
    const Mat F = linear_flow::flow_matrix(model, h);
    const Mat G = linalg::phi1(model.block_operator(), h).rightCols(d);

    MildTrajectory tr;
    tr.n_state = n;
    tr.noise = noise;
    tr.times.reserve(noise.n_steps + 1);
    tr.states.reserve(static_cast<std::size_t>(noise.n_steps + 1) * n);
    Vec z = z0;
    tr.times.push_back(noise.s);
    tr.states.insert(tr.states.end(), z.data(), z.data() + n);
    for (int i = 0; i < noise.n_steps; ++i) {
        const double t = noise.s + i * h;
        Vec bz = b.eval(t, z.head(m), z.tail(d));
        Vec next = F * z + G * bz + Eigen::Map<const Vec>(noise.eta_at(i), n);
        const double nrm = next.norm();
        if (!(nrm <= kBlowUp)) {
            tr.blew_up = true;
            tr.blowup_time = noise.s + (i + 1) * h;
            break;
        }
        z = next;
        tr.times.push_back(noise.s + (i + 1) * h);
        tr.states.insert(tr.states.end(), z.data(), z.data() + n);
    }
    return tr;
}

MildTrajectory integrate_mild(const SpectralModel& model, const DriftSpec& b, const Vec& z0, double T, int n_steps,
                              std::uint64_t seed) {
    return integrate_mild(model, b, z0, NoiseRecord::draw(model, 0.0, T, n_steps, seed));
}

double cutoff_psi(double r) {
    if (r <= 1.0) return 1.0;
    if (r >= 2.0) return 0.0;
    const double x = r - 1.0;
    return 1.0 - x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}

DriftSpec cutoff_drift(const DriftSpec& b, double m_level) {
    if (!(m_level >= 1)) throw DomainError("cutoff_drift: level must be >= 1");
    DriftSpec out = b;
    out.name = b.name + "_cut" + std::to_string(static_cast<long>(m_level));
    auto inner = b.eval;
    out.eval = [inner, m_level](double t, const Vec& x, const Vec& y) {
        const double r = std::sqrt(x.squaredNorm() + y.squaredNorm()) / m_level;
        const double w = cutoff_psi(r);
        if (w == 0.0) return Vec::Zero(y.size()).eval();
        return (w * inner(std::min(t, m_level), x, y)).eval();
    };
    if (!b.sup_norm) {
        // Sampled sup over the support |z| <= 2m.
        Rng rng(0x5eed, "sde.cutoff_bound", 0);
        const int n = b.m + b.d;
        double mx = 0.0;
        for (int i = 0; i < 4096; ++i) {
            Vec z(n);
            for (int c = 0; c < n; ++c) z(c) = rng.normal();
            z *= 2.0 * m_level * std::pow(rng.uniform(), 1.0 / n) / z.norm();
            mx = std::max(mx, out(std::min(1.0, m_level), z).norm());
        }
        out.sup_norm = mx;
    }
    return out;
}

}  // namespace degsde::sde
