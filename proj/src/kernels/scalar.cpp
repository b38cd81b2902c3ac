#include "degsde/kernels.hpp"

namespace degsde::kernels::detail {

namespace {

void matvec(int rows, int cols, const double* M, const double* in, double* out, std::size_t n,
            std::size_t ld, bool accumulate) {
    for (int r = 0; r < rows; ++r) {
        double* o = out + r * ld;
        for (std::size_t p = 0; p < n; ++p) {
            double acc = accumulate ? o[p] : 0.0;
            for (int c = 0; c < cols; ++c) acc = acc + M[r * cols + c] * in[c * ld + p];
            o[p] = acc;
        }
    }
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t p = 0; p < n; ++p) y[p] = y[p] + a * x[p];
}

void dot_accumulate(int q, const double* g, const double* dW, std::size_t ld, double* w,
                    std::size_t n) {
    for (std::size_t p = 0; p < n; ++p) {
        double acc = w[p];
        for (int l = 0; l < q; ++l) acc = acc + g[l] * dW[l * ld + p];
        w[p] = acc;
    }
}

void moments(const double* x, std::size_t n, double* sum, double* sumsq) {
    double s = 0.0, s2 = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        s += x[p];
        s2 += x[p] * x[p];
    }
    *sum = s;
    *sumsq = s2;
}

void product_moments(const double* f, const double* w, std::size_t n, double* sum, double* sumsq) {
    double s = 0.0, s2 = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        double v = f[p] * w[p];
        s += v;
        s2 += v * v;
    }
    *sum = s;
    *sumsq = s2;
}

}  // namespace

const KernelTable scalar_table{matvec, axpy, dot_accumulate, moments, product_moments};

}  // namespace degsde::kernels::detail
