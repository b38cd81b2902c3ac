#include "degsde/error.hpp"
#include "degsde/linalg.hpp"
#include "degsde/sde.hpp"

#include <algorithm>
#include <cmath>

namespace degsde::sde {

std::vector<GapRow> uniqueness_experiment(const SpectralModel& model, const DriftSpec& b, const Vec& z0,
                                          double perturbation, double T, const std::vector<int>& n_steps,
                                          std::uint64_t seed, std::uint64_t path) {
    if (!(perturbation >= 0)) throw DomainError("uniqueness_experiment: perturbation must be >= 0");
    if (n_steps.empty()) throw DomainError("uniqueness_experiment: no step counts");
    const int finest = *std::max_element(n_steps.begin(), n_steps.end());
    const NoiseRecord base = NoiseRecord::draw(model, 0.0, T, finest, seed, path);
    const Vec z1 = z0 + perturbation * Vec::Ones(z0.size()) / std::sqrt(static_cast<double>(z0.size()));
    std::vector<GapRow> rows;
    for (int N : n_steps) {
        if (N < 1 || finest % N != 0) throw DomainError("uniqueness_experiment: step counts must divide the finest");
        const NoiseRecord rec = base.coarsen(model, finest / N);
        MildTrajectory a = integrate_mild(model, b, z0, rec);
        MildTrajectory c = integrate_mild(model, b, z1, rec);
        GapRow row;
        row.n_steps = N;
        row.blew_up = a.blew_up || c.blew_up;
        if (a.blowup_time) row.blowup_time = a.blowup_time;
        if (c.blowup_time && (!row.blowup_time || *c.blowup_time < *row.blowup_time)) row.blowup_time = c.blowup_time;
        const int len = std::min(a.n_steps(), c.n_steps());
        for (int i = 0; i <= len; ++i) row.sup_gap = std::max(row.sup_gap, (a.state(i) - c.state(i)).norm());
        row.terminal_gap = (a.state(len) - c.state(len)).norm();
        rows.push_back(row);
    }
    return rows;
}

double representation_residual(const SpectralModel& model, const MildTrajectory& traj,
                               const regularization::Field& field, double lambda,
                               const regularization::FieldGrid* box) {
    const int m = model.m(), d = model.d();
    if (field.d() != d) throw DomainError("representation_residual: field dimension mismatch");
    const int N = traj.n_steps();
    if (N < 1) throw DomainError("representation_residual: trajectory has no steps");
    if (box)
        for (int i = 0; i <= N; ++i)
            if (!box->contains(traj.state(i)))
                throw CoverageError(traj.times[i], "representation_residual: trajectory leaves the grid box at t = " +
                                                       std::to_string(traj.times[i]));
    const double h = traj.noise.h();
    const Mat E = linalg::expm(model.A2 * h);
    const Mat Lm = lambda * Mat::Identity(d, d) - model.A2;

    Vec z = traj.state(0);
    Vec u = field.value(traj.times[0], z);
    Vec Q = z.tail(d) + u;  // e^{tA2}(Y_0 + u_0(Z_0))
    Vec D = Vec::Zero(d), S = Vec::Zero(d), M = Vec::Zero(d);
    double worst = 0.0;
    for (int i = 0; i < N; ++i) {
        const double t = traj.times[i];
        const Mat J = field.grad2(t, z);
        Eigen::Map<const Vec> dW(traj.noise.dW_at(i), traj.noise.k);
        const Vec sdW = model.sigma_at(t) * dW;
        const Vec zn = traj.state(i + 1);
        const Vec un = field.value(traj.times[i + 1], zn);
        Q = E * Q;
        D = E * D + 0.5 * h * (E * (Lm * u) + Lm * un);
        S = E * S + Eigen::Map<const Vec>(traj.noise.eta_at(i) + m, d);
        M = E * (M + J * sdW);
        const Vec rhs = Q - un + D + S + M;
        worst = std::max(worst, (zn.tail(d) - rhs).norm());
        z = zn;
        u = un;
    }
    return worst;
}

ResidualSweep residual_sweep(const SpectralModel& model, const DriftSpec& b, const Vec& z0,
                             const regularization::Field& field, double lambda, double T,
                             const std::vector<int>& n_steps, int n_paths, std::uint64_t seed,
                             const regularization::FieldGrid* box) {
    if (n_paths < 1 || n_steps.empty()) throw DomainError("residual_sweep: need paths and step counts");
    const int finest = *std::max_element(n_steps.begin(), n_steps.end());
    ResidualSweep out;
    out.n_steps = n_steps;
    out.residual.assign(n_steps.size(), 0.0);
    for (int p = 0; p < n_paths; ++p) {
        const NoiseRecord base = NoiseRecord::draw(model, 0.0, T, finest, seed, static_cast<std::uint64_t>(p));
        for (std::size_t j = 0; j < n_steps.size(); ++j) {
            if (finest % n_steps[j] != 0) throw DomainError("residual_sweep: step counts must divide the finest");
            MildTrajectory tr = integrate_mild(model, b, z0, base.coarsen(model, finest / n_steps[j]));
            out.residual[j] += representation_residual(model, tr, field, lambda, box) / n_paths;
        }
    }
    for (std::size_t j = 0; j + 1 < n_steps.size(); ++j)
        out.ratios.push_back(out.residual[j + 1] > 0 ? out.residual[j] / out.residual[j + 1] : INFINITY);
    return out;
}

EnvelopeReport envelope_experiment(const SpectralModel& model, const DriftSpec& b, const Vec& z0, double T,
                                   int n_steps, int n_paths, std::uint64_t seed) {
    if (!b.ell || !b.h) throw DomainError("envelope_experiment: drift declares no growth functions");
    const int curve_points = 65;
    if (n_steps % (curve_points - 1) != 0) throw DomainError("envelope_experiment: n_steps must be a multiple of 64");
    const int m = model.m(), d = model.d();
    const int stride = n_steps / (curve_points - 1);
    const Mat E = linalg::expm(model.A2 * (T / n_steps));
    EnvelopeReport rep;
    rep.n_paths = n_paths;
    rep.all_below = true;
    for (int p = 0; p < n_paths; ++p) {
        MildTrajectory tr = integrate_mild(model, b, z0, NoiseRecord::draw(model, 0.0, T, n_steps, seed, p));
        if (tr.blew_up) {
            ++rep.blowups;
            rep.all_below = false;
            continue;
        }
        // xi: stochastic convolution in the y block; Ytilde = Y - xi.
        const double h = tr.noise.h();
        Vec xi = Vec::Zero(d);
        double eta = z0.tail(d).squaredNorm();
        double hprev = b.h(0.0);
        double g = 0.0, C = 1.0 + 1e-12;
        std::vector<double> gs{z0.tail(d).squaredNorm()};
        g = gs.back();
        C = std::max(C, (z0.head(m).squaredNorm() + g) / (1.0 + g));
        for (int i = 0; i < n_steps; ++i) {
            xi = E * xi + Eigen::Map<const Vec>(tr.noise.eta_at(i) + m, d);
            const double hn = b.h(xi.norm());
            eta += h * (hprev + hn);  // 2 * trapezoid
            hprev = hn;
            const Vec z = tr.state(i + 1);
            g = std::max(g, (z.tail(d) - xi).squaredNorm());
            C = std::max(C, (z.head(m).squaredNorm() + g) / (1.0 + g));
            if ((i + 1) % stride == 0) gs.push_back(g);
        }
        BihariCurve curve = bihari_bound(b.ell, eta, T, C, curve_points);
        for (int j = 0; j < curve_points; ++j) {
            const double ratio = gs[j] / curve.bound[j];
            rep.worst_ratio = std::max(rep.worst_ratio, ratio);
            if (!(ratio <= 1.0)) rep.all_below = false;
        }
        rep.eta_T = std::max(rep.eta_T, eta);
        rep.C_env = std::max(rep.C_env, C);
        if (p == 0) rep.curve = curve;
    }
    return rep;
}

}  // namespace degsde::sde
