// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

// Naive serial reference kernels, kept as oracles for the production kernels
// in fairkd::kern. Linked only by tests and the benchmark target.
namespace fairkd::ref {

void mm_nn(const double* a, const double* b, double* c,
           std::size_t m, std::size_t k, std::size_t n);

void mm_abt_acc(const double* a, const double* b, double* acc,
                std::size_t m, std::size_t n, std::size_t k);

void mm_atb_acc(const double* a, const double* b, double* acc,
                std::size_t m, std::size_t k, std::size_t n);

void conv2d_valid(const double* in, const double* kernels, double* out,
                  std::size_t cin, std::size_t h, std::size_t w,
                  std::size_t cout, std::size_t kh, std::size_t kw);

void conv2d_input_grad_acc(const double* gout, const double* kernels, double* in_grad,
                           std::size_t cin, std::size_t h, std::size_t w,
                           std::size_t cout, std::size_t kh, std::size_t kw);

void conv2d_kernel_grad_acc(const double* gout, const double* in, double* k_grad,
                            std::size_t cin, std::size_t h, std::size_t w,
                            std::size_t cout, std::size_t kh, std::size_t kw);

} // namespace fairkd::ref
