#include "degsde/kernels.hpp"
#include "degsde/rng.hpp"

#include <catch_amalgamated.hpp>

#include <vector>

using namespace degsde;

namespace {

std::vector<double> normals(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(n);
    rng.fill_normal(v.data(), n);
    return v;
}

}  // namespace

TEST_CASE("scalar table is always available", "[kernels]") {
    REQUIRE(kernels::available(kernels::Isa::scalar));
    REQUIRE(kernels::available_isas().front() == kernels::Isa::scalar);
}

TEST_CASE("vector kernels reproduce the scalar reference", "[kernels]") {
    const auto& ref = kernels::table(kernels::Isa::scalar);
    for (auto isa : kernels::available_isas()) {
        const auto& k = kernels::table(isa);
        INFO("isa " << kernels::name(isa));
        // Odd block sizes exercise the remainder loops.
        for (std::size_t n : {1u, 3u, 4u, 7u, 64u, 257u}) {
            const std::size_t ld = n + 5;
            const int rows = 3, cols = 4;
            auto M = normals(rows * cols, 1);
            auto in = normals(cols * ld, 2);
            for (bool acc : {false, true}) {
                auto o1 = normals(rows * ld, 3), o2 = o1;
                ref.matvec(rows, cols, M.data(), in.data(), o1.data(), n, ld, acc);
                k.matvec(rows, cols, M.data(), in.data(), o2.data(), n, ld, acc);
                for (int r = 0; r < rows; ++r)
                    for (std::size_t p = 0; p < n; ++p) REQUIRE(o1[r * ld + p] == o2[r * ld + p]);
            }

            auto x = normals(n, 4), y1 = normals(n, 5), y2 = y1;
            ref.axpy(0.37, x.data(), y1.data(), n);
            k.axpy(0.37, x.data(), y2.data(), n);
            REQUIRE(y1 == y2);

            auto g = normals(2, 6);
            auto dW = normals(2 * ld, 7);
            auto w1 = normals(n, 8), w2 = w1;
            ref.dot_accumulate(2, g.data(), dW.data(), ld, w1.data(), n);
            k.dot_accumulate(2, g.data(), dW.data(), ld, w2.data(), n);
            REQUIRE(w1 == w2);

            double s1, q1, s2, q2;
            ref.moments(x.data(), n, &s1, &q1);
            k.moments(x.data(), n, &s2, &q2);
            REQUIRE(s2 == Catch::Approx(s1).epsilon(1e-13).margin(1e-13));
            REQUIRE(q2 == Catch::Approx(q1).epsilon(1e-13));
            ref.product_moments(x.data(), w1.data(), n, &s1, &q1);
            k.product_moments(x.data(), w1.data(), n, &s2, &q2);
            REQUIRE(s2 == Catch::Approx(s1).epsilon(1e-13).margin(1e-13));
            REQUIRE(q2 == Catch::Approx(q1).epsilon(1e-13));
        }
    }
}

TEST_CASE("forcing the scalar table switches the active kernels", "[kernels]") {
    kernels::force(kernels::Isa::scalar);
    REQUIRE(kernels::active_isa() == kernels::Isa::scalar);
    kernels::reset();
    REQUIRE(kernels::available(kernels::active_isa()));
}
