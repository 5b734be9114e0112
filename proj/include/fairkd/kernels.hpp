// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

// Dense kernels used by the graph ops. Every parallel loop writes each output
// element from exactly one thread with a fixed inner summation order, so
// results are bit-identical for any thread count.
namespace fairkd::kern {

// c[m x n] = a[m x k] * b[k x n]
void mm_nn(const double* a, const double* b, double* c,
           std::size_t m, std::size_t k, std::size_t n);

// acc[m x k] += a[m x n] * b[k x n]^T
void mm_abt_acc(const double* a, const double* b, double* acc,
                std::size_t m, std::size_t n, std::size_t k);

// acc[k x n] += a[m x k]^T * b[m x n]
void mm_atb_acc(const double* a, const double* b, double* acc,
                std::size_t m, std::size_t k, std::size_t n);

// out[cout x (h-kh+1) x (w-kw+1)] = valid cross-correlation of
// in[cin x h x w] with kernels[cout x cin x kh x kw], stride 1.
void conv2d_valid(const double* in, const double* kernels, double* out,
                  std::size_t cin, std::size_t h, std::size_t w,
                  std::size_t cout, std::size_t kh, std::size_t kw);

// in_grad[cin x h x w] += gradient of conv2d_valid w.r.t. its input.
void conv2d_input_grad_acc(const double* gout, const double* kernels, double* in_grad,
                           std::size_t cin, std::size_t h, std::size_t w,
                           std::size_t cout, std::size_t kh, std::size_t kw);

// k_grad[cout x cin x kh x kw] += gradient of conv2d_valid w.r.t. kernels.
void conv2d_kernel_grad_acc(const double* gout, const double* in, double* k_grad,
                            std::size_t cin, std::size_t h, std::size_t w,
                            std::size_t cout, std::size_t kh, std::size_t kw);

} // namespace fairkd::kern
