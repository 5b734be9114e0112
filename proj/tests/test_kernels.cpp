// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <vector>

#include "doctest.h"
#include "fairkd/kernels.hpp"
#include "fairkd/ref_kernels.hpp"
#include "fairkd/rng.hpp"

namespace {

std::vector<double> randu(std::size_t n, std::uint64_t seed) {
    fairkd::Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

void check_identical(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        INFO("element ", i);
        CHECK(a[i] == b[i]); // bitwise: same summation order in both paths
    }
}

// Gradient kernels sum per-element products in a temporary before the single
// accumulate; the reference scatters straight into the buffer. The different
// association costs a few ULP, never more.
void check_close(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        INFO("element ", i);
        CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
    }
}

} // namespace

TEST_CASE("mm_nn matches the serial reference bitwise") {
    const struct { std::size_t m, k, n; } shapes[] = {
        {1, 1, 1}, {2, 3, 4}, {7, 5, 9}, {16, 16, 16}, {33, 65, 17}, {80, 64, 80}};
    std::uint64_t seed = 100;
    for (const auto& s : shapes) {
        const auto a = randu(s.m * s.k, seed++);
        const auto b = randu(s.k * s.n, seed++);
        std::vector<double> c1(s.m * s.n), c2(s.m * s.n);
        fairkd::kern::mm_nn(a.data(), b.data(), c1.data(), s.m, s.k, s.n);
        fairkd::ref::mm_nn(a.data(), b.data(), c2.data(), s.m, s.k, s.n);
        check_identical(c1, c2);
    }
}

TEST_CASE("matmul gradient kernels match the reference bitwise") {
    const std::size_t m = 9, k = 7, n = 11;
    const auto a = randu(m * k, 1);
    const auto b = randu(k * n, 2);
    const auto g = randu(m * n, 3);

    std::vector<double> da1(m * k, 0.5), da2(m * k, 0.5);
    fairkd::kern::mm_abt_acc(g.data(), b.data(), da1.data(), m, n, k);
    fairkd::ref::mm_abt_acc(g.data(), b.data(), da2.data(), m, n, k);
    check_close(da1, da2);

    std::vector<double> db1(k * n, -0.25), db2(k * n, -0.25);
    fairkd::kern::mm_atb_acc(a.data(), g.data(), db1.data(), m, k, n);
    fairkd::ref::mm_atb_acc(a.data(), g.data(), db2.data(), m, k, n);
    check_close(db1, db2);
}

TEST_CASE("conv2d forward matches the serial reference bitwise") {
    const struct { std::size_t cin, h, w, cout, kh, kw; } shapes[] = {
        {1, 3, 3, 1, 3, 3}, {1, 5, 5, 2, 3, 3}, {3, 8, 6, 4, 3, 3},
        {2, 7, 7, 2, 1, 1}, {2, 9, 11, 3, 5, 3}, {8, 16, 16, 8, 3, 3}};
    std::uint64_t seed = 200;
    for (const auto& s : shapes) {
        const auto x = randu(s.cin * s.h * s.w, seed++);
        const auto k = randu(s.cout * s.cin * s.kh * s.kw, seed++);
        const std::size_t oh = s.h - s.kh + 1, ow = s.w - s.kw + 1;
        std::vector<double> y1(s.cout * oh * ow), y2(s.cout * oh * ow);
        fairkd::kern::conv2d_valid(x.data(), k.data(), y1.data(), s.cin, s.h, s.w, s.cout, s.kh,
                                   s.kw);
        fairkd::ref::conv2d_valid(x.data(), k.data(), y2.data(), s.cin, s.h, s.w, s.cout, s.kh,
                                  s.kw);
        check_identical(y1, y2);
    }
}

TEST_CASE("conv2d gradient kernels match the reference within 1e-12") {
    // The parallel input-grad uses a gather order, the reference scatters, so
    // compare to tolerance; both gradient kernels carry the same few-ULP bound.
    const std::size_t cin = 3, h = 8, w = 7, cout = 4, kh = 3, kw = 3;
    const std::size_t oh = h - kh + 1, ow = w - kw + 1;
    const auto x = randu(cin * h * w, 11);
    const auto k = randu(cout * cin * kh * kw, 12);
    const auto g = randu(cout * oh * ow, 13);

    std::vector<double> dx1(cin * h * w, 0.125), dx2(cin * h * w, 0.125);
    fairkd::kern::conv2d_input_grad_acc(g.data(), k.data(), dx1.data(), cin, h, w, cout, kh, kw);
    fairkd::ref::conv2d_input_grad_acc(g.data(), k.data(), dx2.data(), cin, h, w, cout, kh, kw);
    REQUIRE(dx1.size() == dx2.size());
    for (std::size_t i = 0; i < dx1.size(); ++i)
        CHECK(dx1[i] == doctest::Approx(dx2[i]).epsilon(1e-12));

    std::vector<double> dk1(cout * cin * kh * kw, -1.0), dk2(cout * cin * kh * kw, -1.0);
    fairkd::kern::conv2d_kernel_grad_acc(g.data(), x.data(), dk1.data(), cin, h, w, cout, kh, kw);
    fairkd::ref::conv2d_kernel_grad_acc(g.data(), x.data(), dk2.data(), cin, h, w, cout, kh, kw);
    check_close(dk1, dk2);
}

TEST_CASE("accumulating kernels add instead of overwrite") {
    const std::size_t m = 2, n = 2, k = 2;
    const std::vector<double> g(m * n, 1.0), b(k * n, 1.0);
    std::vector<double> acc(m * k, 10.0);
    fairkd::kern::mm_abt_acc(g.data(), b.data(), acc.data(), m, n, k);
    for (double v : acc) CHECK(v == 12.0); // 10 + row dot = 10 + 2
}
