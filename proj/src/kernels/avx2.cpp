#include "degsde/kernels.hpp"

#include <immintrin.h>

// Same operation order as the scalar reference (multiply, then add; no FMA),
// four paths per lane group.
namespace degsde::kernels::detail {

namespace {

void matvec(int rows, int cols, const double* M, const double* in, double* out, std::size_t n,
            std::size_t ld, bool accumulate) {
    for (int r = 0; r < rows; ++r) {
        double* o = out + r * ld;
        std::size_t p = 0;
        for (; p + 4 <= n; p += 4) {
            __m256d acc = accumulate ? _mm256_loadu_pd(o + p) : _mm256_setzero_pd();
            for (int c = 0; c < cols; ++c) {
                __m256d m = _mm256_set1_pd(M[r * cols + c]);
                acc = _mm256_add_pd(acc, _mm256_mul_pd(m, _mm256_loadu_pd(in + c * ld + p)));
            }
            _mm256_storeu_pd(o + p, acc);
        }
        for (; p < n; ++p) {
            double acc = accumulate ? o[p] : 0.0;
            for (int c = 0; c < cols; ++c) acc = acc + M[r * cols + c] * in[c * ld + p];
            o[p] = acc;
        }
    }
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    __m256d va = _mm256_set1_pd(a);
    std::size_t p = 0;
    for (; p + 4 <= n; p += 4)
        _mm256_storeu_pd(y + p, _mm256_add_pd(_mm256_loadu_pd(y + p),
                                              _mm256_mul_pd(va, _mm256_loadu_pd(x + p))));
    for (; p < n; ++p) y[p] = y[p] + a * x[p];
}

void dot_accumulate(int q, const double* g, const double* dW, std::size_t ld, double* w,
                    std::size_t n) {
    std::size_t p = 0;
    for (; p + 4 <= n; p += 4) {
        __m256d acc = _mm256_loadu_pd(w + p);
        for (int l = 0; l < q; ++l)
            acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(g[l]),
                                                   _mm256_loadu_pd(dW + l * ld + p)));
        _mm256_storeu_pd(w + p, acc);
    }
    for (; p < n; ++p) {
        double acc = w[p];
        for (int l = 0; l < q; ++l) acc = acc + g[l] * dW[l * ld + p];
        w[p] = acc;
    }
}

double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v), hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(lo) + _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
}

void moments(const double* x, std::size_t n, double* sum, double* sumsq) {
    __m256d s = _mm256_setzero_pd(), s2 = _mm256_setzero_pd();
    std::size_t p = 0;
    for (; p + 4 <= n; p += 4) {
        __m256d v = _mm256_loadu_pd(x + p);
        s = _mm256_add_pd(s, v);
        s2 = _mm256_add_pd(s2, _mm256_mul_pd(v, v));
    }
    double a = hsum(s), b = hsum(s2);
    for (; p < n; ++p) {
        a += x[p];
        b += x[p] * x[p];
    }
    *sum = a;
    *sumsq = b;
}

void product_moments(const double* f, const double* w, std::size_t n, double* sum, double* sumsq) {
    __m256d s = _mm256_setzero_pd(), s2 = _mm256_setzero_pd();
    std::size_t p = 0;
    for (; p + 4 <= n; p += 4) {
        __m256d v = _mm256_mul_pd(_mm256_loadu_pd(f + p), _mm256_loadu_pd(w + p));
        s = _mm256_add_pd(s, v);
        s2 = _mm256_add_pd(s2, _mm256_mul_pd(v, v));
    }
    double a = hsum(s), b = hsum(s2);
    for (; p < n; ++p) {
        double v = f[p] * w[p];
        a += v;
        b += v * v;
    }
    *sum = a;
    *sumsq = b;
}

}  // namespace

const KernelTable avx2_table{matvec, axpy, dot_accumulate, moments, product_moments};

}  // namespace degsde::kernels::detail
