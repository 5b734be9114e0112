// SPDX-License-Identifier: Apache-2.0
// Timing comparison between the OpenMP kernels and the serial reference.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <vector>

#include "fairkd/kernels.hpp"
#include "fairkd/ref_kernels.hpp"
#include "fairkd/rng.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double time_ms(int reps, const std::function<void()>& fn) {
    fn(); // warm up
    const auto t0 = Clock::now();
    for (int i = 0; i < reps; ++i) fn();
    const auto t1 = Clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

std::vector<double> randu(std::size_t n, std::uint64_t seed) {
    fairkd::Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

double checksum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

void bench_matmul(std::size_t m, std::size_t n, std::size_t k, int reps) {
    const auto a = randu(m * n, 1);
    const auto b = randu(n * k, 2);
    std::vector<double> c_par(m * k), c_ref(m * k);
    const double t_par = time_ms(reps, [&] {
        fairkd::kern::mm_nn(a.data(), b.data(), c_par.data(), m, n, k);
    });
    const double t_ref = time_ms(reps, [&] {
        fairkd::ref::mm_nn(a.data(), b.data(), c_ref.data(), m, n, k);
    });
    std::printf("matmul %zux%zux%zu: omp %.3f ms, ref %.3f ms, speedup %.2fx, |dsum|=%.3g\n", m,
                n, k, t_par, t_ref, t_ref / t_par, std::abs(checksum(c_par) - checksum(c_ref)));
}

void bench_conv(std::size_t cin, std::size_t cout, std::size_t h, std::size_t w, std::size_t kh,
                std::size_t kw, int reps) {
    const auto x = randu(cin * h * w, 3);
    const auto kr = randu(cout * cin * kh * kw, 4);
    const std::size_t oh = h - kh + 1, ow = w - kw + 1;
    std::vector<double> y_par(cout * oh * ow), y_ref(cout * oh * ow);
    const double t_par = time_ms(reps, [&] {
        fairkd::kern::conv2d_valid(x.data(), kr.data(), y_par.data(), cin, h, w, cout, kh, kw);
    });
    const double t_ref = time_ms(reps, [&] {
        fairkd::ref::conv2d_valid(x.data(), kr.data(), y_ref.data(), cin, h, w, cout, kh, kw);
    });
    std::printf("conv2d c%zu->%zu %zux%zu k%zux%zu: omp %.3f ms, ref %.3f ms, speedup %.2fx, "
                "|dsum|=%.3g\n",
                cin, cout, h, w, kh, kw, t_par, t_ref, t_ref / t_par,
                std::abs(checksum(y_par) - checksum(y_ref)));
}

} // namespace

int main() {
    bench_matmul(64, 64, 64, 50);
    bench_matmul(256, 256, 256, 10);
    bench_matmul(512, 512, 512, 3);
    bench_conv(8, 8, 32, 32, 3, 3, 50);
    bench_conv(16, 32, 64, 64, 3, 3, 5);
    return 0;
}
