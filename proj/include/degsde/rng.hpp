#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace degsde {

/// Derive the seed of a named substream. All randomness in the library flows
/// from one root seed through (name, index) pairs such as
/// ("linear_flow.sample", block).
std::uint64_t substream_seed(std::uint64_t root, std::string_view name, std::uint64_t index);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    Rng(std::uint64_t root, std::string_view name, std::uint64_t index)
        : engine_(substream_seed(root, name, index)) {}

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }
    void fill_normal(double* out, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) out[i] = normal_(engine_);
    }
    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace degsde
