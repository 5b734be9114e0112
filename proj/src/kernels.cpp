// SPDX-License-Identifier: Apache-2.0
#include "fairkd/kernels.hpp"

#include <cstdint>

namespace fairkd::kern {

namespace {
// Below this many output elements the parallel-for overhead dominates.
constexpr std::size_t kParMin = 4096;
} // namespace

void mm_nn(const double* a, const double* b, double* c,
           std::size_t m, std::size_t k, std::size_t n) {
    const std::int64_t rows = static_cast<std::int64_t>(m);
#pragma omp parallel for if (m * n >= kParMin)
    for (std::int64_t i = 0; i < rows; ++i) {
        const double* ai = a + static_cast<std::size_t>(i) * k;
        double* ci = c + static_cast<std::size_t>(i) * n;
        for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = ai[p];
            const double* bp = b + p * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
        }
    }
}

void mm_abt_acc(const double* a, const double* b, double* acc,
                std::size_t m, std::size_t n, std::size_t k) {
    const std::int64_t rows = static_cast<std::int64_t>(m);
#pragma omp parallel for if (m * k >= kParMin)
    for (std::int64_t i = 0; i < rows; ++i) {
        const double* ai = a + static_cast<std::size_t>(i) * n;
        double* ci = acc + static_cast<std::size_t>(i) * k;
        for (std::size_t j = 0; j < k; ++j) {
            const double* bj = b + j * n;
            double s = 0.0;
            for (std::size_t p = 0; p < n; ++p) s += ai[p] * bj[p];
            ci[j] += s;
        }
    }
}

void mm_atb_acc(const double* a, const double* b, double* acc,
                std::size_t m, std::size_t k, std::size_t n) {
    const std::int64_t rows = static_cast<std::int64_t>(k);
#pragma omp parallel for if (k * n >= kParMin)
    for (std::int64_t i = 0; i < rows; ++i) {
        double* ci = acc + static_cast<std::size_t>(i) * n;
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t p = 0; p < m; ++p)
                s += a[p * k + static_cast<std::size_t>(i)] * b[p * n + j];
            ci[j] += s;
        }
    }
}

void conv2d_valid(const double* in, const double* kernels, double* out,
                  std::size_t cin, std::size_t h, std::size_t w,
                  std::size_t cout, std::size_t kh, std::size_t kw) {
    const std::size_t oh = h - kh + 1;
    const std::size_t ow = w - kw + 1;
    const std::int64_t rows = static_cast<std::int64_t>(cout * oh);
    // Row-axpy form: each (co, oy) output row is owned by one thread and the
    // inner ox loop runs over contiguous memory.
#pragma omp parallel for if (cout * oh * ow >= kParMin)
    for (std::int64_t idx = 0; idx < rows; ++idx) {
        const std::size_t co = static_cast<std::size_t>(idx) / oh;
        const std::size_t oy = static_cast<std::size_t>(idx) % oh;
        double* orow = out + (co * oh + oy) * ow;
        for (std::size_t ox = 0; ox < ow; ++ox) orow[ox] = 0.0;
        for (std::size_t ci = 0; ci < cin; ++ci) {
            const double* inc = in + ci * h * w;
            const double* kc = kernels + (co * cin + ci) * kh * kw;
            for (std::size_t ky = 0; ky < kh; ++ky) {
                const double* irow = inc + (oy + ky) * w;
                for (std::size_t kx = 0; kx < kw; ++kx) {
                    const double kv = kc[ky * kw + kx];
                    const double* ir = irow + kx;
                    for (std::size_t ox = 0; ox < ow; ++ox) orow[ox] += kv * ir[ox];
                }
            }
        }
    }
}

void conv2d_input_grad_acc(const double* gout, const double* kernels, double* in_grad,
                           std::size_t cin, std::size_t h, std::size_t w,
                           std::size_t cout, std::size_t kh, std::size_t kw) {
    const std::size_t oh = h - kh + 1;
    const std::size_t ow = w - kw + 1;
    const std::int64_t total = static_cast<std::int64_t>(cin * h * w);
    // Gather form: each input pixel sums its contributions, so no two threads
    // ever write the same element.
#pragma omp parallel for if (cin * h * w >= kParMin)
    for (std::int64_t idx = 0; idx < total; ++idx) {
        const std::size_t u = static_cast<std::size_t>(idx);
        const std::size_t ci = u / (h * w);
        const std::size_t iy = (u / w) % h;
        const std::size_t ix = u % w;
        double s = 0.0;
        for (std::size_t co = 0; co < cout; ++co) {
            const double* gc = gout + co * oh * ow;
            const double* kc = kernels + (co * cin + ci) * kh * kw;
            for (std::size_t ky = 0; ky < kh; ++ky) {
                if (iy < ky) break;
                const std::size_t oy = iy - ky;
                if (oy >= oh) continue;
                for (std::size_t kx = 0; kx < kw; ++kx) {
                    if (ix < kx) break;
                    const std::size_t ox = ix - kx;
                    if (ox >= ow) continue;
                    s += gc[oy * ow + ox] * kc[ky * kw + kx];
                }
            }
        }
        in_grad[u] += s;
    }
}

void conv2d_kernel_grad_acc(const double* gout, const double* in, double* k_grad,
                            std::size_t cin, std::size_t h, std::size_t w,
                            std::size_t cout, std::size_t kh, std::size_t kw) {
    const std::size_t oh = h - kh + 1;
    const std::size_t ow = w - kw + 1;
    const std::int64_t total = static_cast<std::int64_t>(cout * cin * kh * kw);
#pragma omp parallel for if (cout * cin * kh * kw >= kParMin)
    for (std::int64_t idx = 0; idx < total; ++idx) {
        const std::size_t u = static_cast<std::size_t>(idx);
        const std::size_t co = u / (cin * kh * kw);
        const std::size_t ci = (u / (kh * kw)) % cin;
        const std::size_t ky = (u / kw) % kh;
        const std::size_t kx = u % kw;
        const double* gc = gout + co * oh * ow;
        const double* inc = in + ci * h * w;
        double s = 0.0;
        for (std::size_t oy = 0; oy < oh; ++oy) {
            const double* grow = gc + oy * ow;
            const double* irow = inc + (oy + ky) * w + kx;
            for (std::size_t ox = 0; ox < ow; ++ox) s += grow[ox] * irow[ox];
        }
        k_grad[u] += s;
    }
}

} // namespace fairkd::kern
