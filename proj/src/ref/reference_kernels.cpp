// SPDX-License-Identifier: Apache-2.0
#include "fairkd/ref_kernels.hpp"

// Deliberately written as plain textbook loops, scatter-style where natural,
// so they share no structure with the production kernels they check.
namespace fairkd::ref {

void mm_nn(const double* a, const double* b, double* c,
           std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[p * n + j];
            c[i * n + j] = s;
        }
}

void mm_abt_acc(const double* a, const double* b, double* acc,
                std::size_t m, std::size_t n, std::size_t k) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t p = 0; p < n; ++p)
                acc[i * k + j] += a[i * n + p] * b[j * n + p];
}

void mm_atb_acc(const double* a, const double* b, double* acc,
                std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t p = 0; p < m; ++p)
                acc[i * n + j] += a[p * k + i] * b[p * n + j];
}

void conv2d_valid(const double* in, const double* kernels, double* out,
                  std::size_t cin, std::size_t h, std::size_t w,
                  std::size_t cout, std::size_t kh, std::size_t kw) {
    const std::size_t oh = h - kh + 1;
    const std::size_t ow = w - kw + 1;
    for (std::size_t co = 0; co < cout; ++co)
        for (std::size_t oy = 0; oy < oh; ++oy)
            for (std::size_t ox = 0; ox < ow; ++ox) {
                double s = 0.0;
                for (std::size_t ci = 0; ci < cin; ++ci)
                    for (std::size_t ky = 0; ky < kh; ++ky)
                        for (std::size_t kx = 0; kx < kw; ++kx)
                            s += in[ci * h * w + (oy + ky) * w + (ox + kx)] *
                                 kernels[((co * cin + ci) * kh + ky) * kw + kx];
                out[(co * oh + oy) * ow + ox] = s;
            }
}

void conv2d_input_grad_acc(const double* gout, const double* kernels, double* in_grad,
                           std::size_t cin, std::size_t h, std::size_t w,
                           std::size_t cout, std::size_t kh, std::size_t kw) {
    const std::size_t oh = h - kh + 1;
    const std::size_t ow = w - kw + 1;
    for (std::size_t co = 0; co < cout; ++co)
        for (std::size_t oy = 0; oy < oh; ++oy)
            for (std::size_t ox = 0; ox < ow; ++ox) {
                const double g = gout[(co * oh + oy) * ow + ox];
                for (std::size_t ci = 0; ci < cin; ++ci)
                    for (std::size_t ky = 0; ky < kh; ++ky)
                        for (std::size_t kx = 0; kx < kw; ++kx)
                            in_grad[ci * h * w + (oy + ky) * w + (ox + kx)] +=
                                g * kernels[((co * cin + ci) * kh + ky) * kw + kx];
            }
}

void conv2d_kernel_grad_acc(const double* gout, const double* in, double* k_grad,
                            std::size_t cin, std::size_t h, std::size_t w,
                            std::size_t cout, std::size_t kh, std::size_t kw) {
    const std::size_t oh = h - kh + 1;
    const std::size_t ow = w - kw + 1;
    for (std::size_t co = 0; co < cout; ++co)
        for (std::size_t oy = 0; oy < oh; ++oy)
            for (std::size_t ox = 0; ox < ow; ++ox) {
                const double g = gout[(co * oh + oy) * ow + ox];
                for (std::size_t ci = 0; ci < cin; ++ci)
                    for (std::size_t ky = 0; ky < kh; ++ky)
                        for (std::size_t kx = 0; kx < kw; ++kx)
                            k_grad[((co * cin + ci) * kh + ky) * kw + kx] +=
                                g * in[ci * h * w + (oy + ky) * w + (ox + kx)];
            }
}

} // namespace fairkd::ref
