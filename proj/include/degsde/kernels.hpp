#pragma once

#include <cstddef>
#include <string>
#include <vector>

// Path loops work on structure-of-arrays blocks: component c of path p lives
// at data[c * ld + p]. The scalar table is the reference; vector variants must
// reproduce the elementwise kernels bit for bit and the reductions to rounding.
namespace degsde::kernels {

enum class Isa { scalar, avx2 };

struct KernelTable {
    /// out[r] (=|+=) sum_c M(r, c) * in[c], M row-major rows x cols.
    void (*matvec)(int rows, int cols, const double* M, const double* in, double* out,
                   std::size_t n, std::size_t ld, bool accumulate);
    /// y += a * x
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    /// w += sum_l g[l] * dW[l]
    void (*dot_accumulate)(int q, const double* g, const double* dW, std::size_t ld, double* w,
                           std::size_t n);
    /// sum x, sum x^2
    void (*moments)(const double* x, std::size_t n, double* sum, double* sumsq);
    /// sum f*w, sum (f*w)^2
    void (*product_moments)(const double* f, const double* w, std::size_t n, double* sum,
                            double* sumsq);
};

const KernelTable& table(Isa isa);
bool available(Isa isa);
std::vector<Isa> available_isas();
const char* name(Isa isa);

/// Table used by the library: the best available ISA unless DEGSDE_SIMD=scalar
/// is set or a test forced a choice.
const KernelTable& active();
Isa active_isa();
void force(Isa isa);
void reset();

namespace detail {
extern const KernelTable scalar_table;
#if defined(DEGSDE_HAVE_AVX2)
extern const KernelTable avx2_table;
#endif
}  // namespace detail

}  // namespace degsde::kernels
