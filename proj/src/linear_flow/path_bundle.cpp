#include "degsde/error.hpp"
#include "degsde/kernels.hpp"
#include "degsde/linear_flow.hpp"

#include <algorithm>
#include <cmath>

namespace degsde::linear_flow {

StepNoise::StepNoise(const StepLaw& law)
    : n_(static_cast<int>(law.KW.rows())),
      k_(static_cast<int>(law.KW.cols())),
      r_(static_cast<int>(law.R.cols())),
      sqrt_h_(std::sqrt(law.h)),
      KW_(row_major(law.KW)),
      R_(row_major(law.R)) {}

void StepNoise::draw(Rng& rng, std::size_t nb, double* dW, double* eta) {
    const auto& K = kernels::active();
    rng.fill_normal(dW, static_cast<std::size_t>(k_) * nb);
    for (std::size_t i = 0; i < static_cast<std::size_t>(k_) * nb; ++i) dW[i] *= sqrt_h_;
    K.matvec(n_, k_, KW_.data(), dW, eta, nb, nb, false);
    if (r_ > 0) {
        xi_.resize(static_cast<std::size_t>(r_) * nb);
        rng.fill_normal(xi_.data(), xi_.size());
        K.matvec(n_, r_, R_.data(), xi_.data(), eta, nb, nb, true);
    }
}

Vec PathBundle::state_vec(int p, int i) const {
    Vec v(n_state);
    for (int c = 0; c < n_state; ++c) v(c) = state(p, i, c);
    return v;
}

PathBundle sample_linear(const SpectralModel& model, double s, double t, const Vec& z, int n_paths,
                         int n_steps, std::uint64_t seed) {
    if (n_paths < 1 || n_steps < 1) throw DomainError("sample_linear: n_paths and n_steps must be >= 1");
    if (!(t > s)) throw DomainError("sample_linear: need t > s");
    if (z.size() != model.n()) throw DomainError("sample_linear: state has wrong dimension");
    const int n = model.n(), k = model.k();
    PathBundle pb;
    pb.n_paths = n_paths;
    pb.n_state = n;
    pb.n_noise = k;
    pb.seed = seed;
    pb.stream = "linear_flow.sample";
    pb.times.resize(n_steps + 1);
    for (int i = 0; i <= n_steps; ++i) pb.times[i] = s + (t - s) * i / n_steps;
    pb.times.back() = t;
    const std::size_t N1 = n_steps + 1;
    pb.states.assign(static_cast<std::size_t>(n_paths) * N1 * n, 0.0);
    pb.dW.assign(static_cast<std::size_t>(n_paths) * n_steps * k, 0.0);
    pb.eta.assign(static_cast<std::size_t>(n_paths) * n_steps * n, 0.0);

    std::vector<StepLaw> laws;
    if (model.time_dependent()) {
        for (int i = 0; i < n_steps; ++i) laws.push_back(step_law(model, pb.times[i], pb.times[i + 1]));
    } else {
        laws.push_back(step_law(model, s, pb.times[1]));
    }
    std::vector<StepNoise> noise;
    for (const auto& L : laws) noise.emplace_back(L);
    std::vector<std::vector<double>> F;
    for (const auto& L : laws) F.push_back(row_major(L.F));

    const auto& K = kernels::active();
    std::vector<double> Z(n * kBlock), Znew(n * kBlock), dW(k * kBlock), eta(n * kBlock);
    const std::size_t n_blocks = (n_paths + kBlock - 1) / kBlock;
    for (std::size_t b = 0; b < n_blocks; ++b) {
        const std::size_t p0 = b * kBlock;
        const std::size_t nb = std::min(kBlock, static_cast<std::size_t>(n_paths) - p0);
        Rng rng(seed, pb.stream, b);
        for (int c = 0; c < n; ++c)
            for (std::size_t p = 0; p < nb; ++p) Z[c * nb + p] = z(c);
        auto store_state = [&](int i) {
            for (std::size_t p = 0; p < nb; ++p)
                for (int c = 0; c < n; ++c) pb.states[((p0 + p) * N1 + i) * n + c] = Z[c * nb + p];
        };
        store_state(0);
        for (int i = 0; i < n_steps; ++i) {
            const std::size_t li = laws.size() == 1 ? 0 : i;
            noise[li].draw(rng, nb, dW.data(), eta.data());
            std::copy(eta.begin(), eta.begin() + n * nb, Znew.begin());
            K.matvec(n, n, F[li].data(), Z.data(), Znew.data(), nb, nb, true);
            std::swap(Z, Znew);
            store_state(i + 1);
            for (std::size_t p = 0; p < nb; ++p) {
                for (int l = 0; l < k; ++l) pb.dW[((p0 + p) * n_steps + i) * k + l] = dW[l * nb + p];
                for (int c = 0; c < n; ++c) pb.eta[((p0 + p) * n_steps + i) * n + c] = eta[c * nb + p];
            }
        }
    }
    return pb;
}

}  // namespace degsde::linear_flow
