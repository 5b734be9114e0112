// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "fairkd/errors.hpp"
#include "fairkd/graph.hpp"
#include "fairkd/rng.hpp"
#include "fairkd/tensor.hpp"
#include "gradcheck.hpp"

using fairkd::Graph;
using fairkd::Rng;
using fairkd::Tensor;

TEST_CASE("tensor basics") {
    Tensor z = Tensor::zeros({2, 3});
    CHECK(z.numel() == 6);
    CHECK(z.rank() == 2);
    CHECK(z.at(1, 2) == 0.0);
    CHECK_FALSE(z.requires_grad());

    Tensor f = Tensor::from_data({2, 2}, {1, 2, 3, 4});
    CHECK(f.at(0, 1) == 2.0);
    CHECK(f.at(1, 0) == 3.0);
    CHECK_THROWS_AS(Tensor::from_data({2, 2}, {1, 2, 3}), fairkd::DimensionError);

    Tensor s = Tensor::scalar(7.0);
    CHECK(s.value() == 7.0);
    CHECK_THROWS_AS(f.value(), fairkd::DimensionError);

    Tensor alias = f;
    CHECK(alias.same_storage(f));
    alias.data()[0] = 9.0;
    CHECK(f.at(0, 0) == 9.0);

    Tensor copy = f.clone();
    CHECK_FALSE(copy.same_storage(f));
    copy.data()[0] = -1.0;
    CHECK(f.at(0, 0) == 9.0);
}

TEST_CASE("grad buffer lifecycle") {
    Tensor t = Tensor::zeros({3}, true);
    CHECK_FALSE(t.has_grad());
    t.grad()[1] = 2.0;
    CHECK(t.has_grad());
    t.zero_grad();
    CHECK(t.grad()[1] == 0.0);
    t.drop_grad();
    CHECK_FALSE(t.has_grad());
    const Tensor& ct = t;
    CHECK_THROWS_AS((void)ct.grad(), fairkd::ContractError);
}

TEST_CASE("matmul identity and zero-row examples") {
    Graph g;
    Tensor eye = Tensor::from_data({2, 2}, {1, 0, 0, 1});
    Tensor m = Tensor::from_data({2, 2}, {1, 2, 3, 4});
    Tensor out = g.matmul(eye, m);
    for (std::size_t i = 0; i < 4; ++i) CHECK(out.data()[i] == m.data()[i]);

    Tensor a = Tensor::from_data({1, 2}, {1, 0});
    Tensor b = Tensor::from_data({2, 1}, {0, 5});
    CHECK(g.matmul(a, b).value() == 0.0);

    CHECK_THROWS_AS(g.matmul(b, b), fairkd::DimensionError);
    CHECK_THROWS_WITH_AS(g.matmul(Tensor::from_data({1, 3}, {1, 2, 3}), m),
                         doctest::Contains("[1, 3]"), fairkd::DimensionError);
}

TEST_CASE("matmul matches triple-loop oracle") {
    Rng rng(11);
    Tensor a = testsup::rand_tensor(rng, {3, 4}, -1, 1, false);
    Tensor b = testsup::rand_tensor(rng, {4, 2}, -1, 1, false);
    Graph g;
    Tensor out = g.matmul(a, b);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            double s = 0.0;
            for (std::size_t p = 0; p < 4; ++p) s += a.at(i, p) * b.at(p, j);
            CHECK(out.at(i, j) == doctest::Approx(s).epsilon(1e-12));
        }
    }
}

TEST_CASE("softmax examples and invariants") {
    Graph g;
    Tensor x = Tensor::from_data({2}, {0, 0});
    Tensor y = g.softmax(x, 0);
    CHECK(y.data()[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(y.data()[1] == doctest::Approx(0.5).epsilon(1e-12));

    Tensor x2 = Tensor::from_data({2}, {std::log(2.0), 0.0});
    Tensor y2 = g.softmax(x2, 0);
    CHECK(y2.data()[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(y2.data()[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    Rng rng(5);
    Tensor v = testsup::rand_tensor(rng, {5}, -3, 3, false);
    Tensor sv = g.softmax(v, 0);
    double denom = 0.0, vmax = v.data()[0];
    for (double e : v.data()) vmax = std::max(vmax, e);
    for (double e : v.data()) denom += std::exp(e - vmax);
    double sum = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
        const double expect = std::exp(v.data()[i] - vmax) / denom;
        CHECK(sv.data()[i] == doctest::Approx(expect).epsilon(1e-12));
        CHECK(sv.data()[i] > 0.0);
        CHECK(sv.data()[i] < 1.0);
        sum += sv.data()[i];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

    // Shift invariance along the axis.
    Tensor shifted = v.clone();
    for (auto& e : shifted.data()) e += 13.25;
    Tensor ss = g.softmax(shifted, 0);
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(std::abs(ss.data()[i] - sv.data()[i]) < 1e-12);

    // Axis handling on a matrix: rows sum to 1 with axis 1.
    Tensor m = testsup::rand_tensor(rng, {3, 4}, -2, 2, false);
    Tensor sm = g.softmax(m, 1);
    for (std::size_t i = 0; i < 3; ++i) {
        double rs = 0.0;
        for (std::size_t j = 0; j < 4; ++j) rs += sm.at(i, j);
        CHECK(rs == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(g.softmax(m, 2), fairkd::DimensionError);
}

TEST_CASE("pointwise op examples") {
    Graph g;
    CHECK(g.sigmoid(Tensor::scalar(0.0)).value() == 0.5);
    CHECK(g.log(Tensor::scalar(1.0)).value() == 0.0);
    CHECK(g.mean(Tensor::from_data({4}, {1, 2, 3, 4})).value() == doctest::Approx(2.5));
    CHECK(g.relu(Tensor::from_data({3}, {-1, 0, 2})).data() == std::vector<double>{0, 0, 2});

    // Stable sigmoid on extreme inputs.
    CHECK(g.sigmoid(Tensor::scalar(-800.0)).value() == 0.0);
    CHECK(g.sigmoid(Tensor::scalar(800.0)).value() == 1.0);

    // log clamps below kLogClamp instead of returning -inf.
    const double lv = g.log(Tensor::scalar(0.0)).value();
    CHECK(lv == doctest::Approx(std::log(Graph::kLogClamp)));

    Tensor a = Tensor::from_data({2}, {1, 2});
    Tensor b = Tensor::from_data({2}, {3, 5});
    CHECK(g.add(a, b).data() == std::vector<double>{4, 7});
    CHECK(g.sub(a, b).data() == std::vector<double>{-2, -3});
    CHECK(g.mul(a, b).data() == std::vector<double>{3, 10});
    CHECK(g.add_const(a, 1.5).data() == std::vector<double>{2.5, 3.5});
    CHECK(g.mul_const(a, -2.0).data() == std::vector<double>{-2, -4});

    // Scalar broadcast both ways.
    Tensor s = Tensor::scalar(10.0);
    CHECK(g.add(a, s).data() == std::vector<double>{11, 12});
    CHECK(g.mul(s, a).data() == std::vector<double>{10, 20});
    CHECK_THROWS_AS(g.add(a, Tensor::zeros({3})), fairkd::DimensionError);
}

TEST_CASE("structural ops") {
    Graph g;
    Tensor img = Tensor::from_data({2, 2, 2}, {1, 2, 3, 4, 10, 20, 30, 40});
    Tensor gap = g.global_avg_pool(img);
    CHECK(gap.shape() == fairkd::Shape{1, 2});
    CHECK(gap.at(0, 0) == doctest::Approx(2.5));
    CHECK(gap.at(0, 1) == doctest::Approx(25.0));

    Tensor fl = g.flatten(img);
    CHECK(fl.shape() == fairkd::Shape{1, 8});
    CHECK(fl.at(0, 5) == 20.0);

    Tensor r0 = Tensor::from_data({1, 3}, {1, 2, 3});
    Tensor r1 = Tensor::from_data({1, 3}, {4, 5, 6});
    Tensor st = g.stack_rows({r0, r1});
    CHECK(st.shape() == fairkd::Shape{2, 3});
    CHECK(st.at(1, 2) == 6.0);
    CHECK_THROWS_AS(g.stack_rows({}), fairkd::ContractError);
    CHECK_THROWS_AS(g.stack_rows({r0, Tensor::from_data({1, 2}, {1, 2})}),
                    fairkd::DimensionError);

    Tensor bias = Tensor::from_data({2}, {100, 200});
    Tensor bc = g.bias_channels(img, bias);
    CHECK(bc.at(0) == 101.0);
    CHECK(bc.data()[7] == 240.0);
}

TEST_CASE("conv2d examples") {
    Graph g;
    Rng rng(3);
    Tensor x = testsup::rand_tensor(rng, {1, 5, 5}, -1, 1, false);

    Tensor zk = Tensor::zeros({2, 1, 3, 3});
    Tensor zout = g.conv2d(x, zk);
    CHECK(zout.shape() == fairkd::Shape{2, 3, 3});
    for (double v : zout.data()) CHECK(v == 0.0);

    // Delta kernel picks the central crop.
    std::vector<double> dk(9, 0.0);
    dk[4] = 1.0;
    Tensor delta = Tensor::from_data({1, 1, 3, 3}, dk);
    Tensor crop = g.conv2d(x, delta);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(crop.data()[i * 3 + j] == x.data()[(i + 1) * 5 + (j + 1)]);

    // Random case vs quadruple-loop oracle.
    Tensor k = testsup::rand_tensor(rng, {2, 1, 3, 3}, -1, 1, false);
    Tensor out = g.conv2d(x, k);
    for (std::size_t co = 0; co < 2; ++co)
        for (std::size_t oy = 0; oy < 3; ++oy)
            for (std::size_t ox = 0; ox < 3; ++ox) {
                double s = 0.0;
                for (std::size_t ky = 0; ky < 3; ++ky)
                    for (std::size_t kx = 0; kx < 3; ++kx)
                        s += x.data()[(oy + ky) * 5 + ox + kx] * k.data()[co * 9 + ky * 3 + kx];
                CHECK(out.data()[co * 9 + oy * 3 + ox] == doctest::Approx(s).epsilon(1e-12));
            }

    CHECK_THROWS_AS(g.conv2d(Tensor::zeros({1, 2, 5}), delta), fairkd::DimensionError);
    CHECK_THROWS_AS(g.conv2d(Tensor::zeros({2, 5, 5}), delta), fairkd::DimensionError);
}

TEST_CASE("backward passthrough and analytic examples") {
    {
        Graph g;
        Tensor x = Tensor::scalar(3.0, true);
        Tensor loss = g.mul_const(x, 1.0);
        g.backward(loss);
        CHECK(x.grad()[0] == 1.0);
    }
    {
        // loss = mean(x*x), x=[1,2] -> grad [1, 2]
        Graph g;
        Tensor x = Tensor::from_data({2}, {1, 2}, true);
        Tensor loss = g.mean(g.mul(x, x));
        g.backward(loss);
        CHECK(x.grad()[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(x.grad()[1] == doctest::Approx(2.0).epsilon(1e-12));
    }
    {
        Graph g;
        Tensor x = Tensor::zeros({2}, true);
        CHECK_THROWS_AS(g.backward(x), fairkd::ContractError);
    }
}

TEST_CASE("two consumers sum their path gradients") {
    // loss = mean(x*x) + mean(x): d/dx_i = 2 x_i / n + 1/n.
    Graph g;
    Tensor x = Tensor::from_data({3}, {0.5, -1.0, 2.0}, true);
    Tensor loss = g.add(g.mean(g.mul(x, x)), g.mean(x));
    g.backward(loss);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(x.grad()[i] == doctest::Approx(2.0 * x.data()[i] / 3.0 + 1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("leaf gradients accumulate across backward calls") {
    Graph g;
    Tensor x = Tensor::scalar(2.0, true);
    Tensor l1 = g.mul(x, x);        // dl1/dx = 4
    Tensor l2 = g.mul_const(x, 3.0); // dl2/dx = 3
    g.backward(l1);
    CHECK(x.grad()[0] == doctest::Approx(4.0));
    g.backward(l2);
    CHECK(x.grad()[0] == doctest::Approx(7.0));
    // Intermediate outputs have transient grads only.
    CHECK_FALSE(l1.has_grad());
    CHECK_FALSE(l2.has_grad());
}

TEST_CASE("two losses on one tape stay independent") {
    // Shared intermediate y = x*x feeds two losses; differentiating the second
    // must not double-count the first pass.
    Graph g;
    Tensor x = Tensor::scalar(3.0, true);
    Tensor y = g.mul(x, x);
    Tensor l1 = g.mul_const(y, 1.0);
    Tensor l2 = g.mul_const(y, 10.0);
    g.backward(l1);
    CHECK(x.grad()[0] == doctest::Approx(6.0));
    x.zero_grad();
    g.backward(l2);
    CHECK(x.grad()[0] == doctest::Approx(60.0));
}

TEST_CASE("requires_grad propagates and gates recording") {
    Graph g;
    Tensor a = Tensor::from_data({2}, {1, 2}, false);
    Tensor b = Tensor::from_data({2}, {3, 4}, false);
    const std::size_t before = g.node_count();
    Tensor c = g.mul(a, b);
    CHECK(g.node_count() == before);
    CHECK_FALSE(c.requires_grad());

    Tensor d = Tensor::from_data({2}, {1, 1}, true);
    Tensor e = g.mul(c, d);
    CHECK(e.requires_grad());
    CHECK(g.node_count() == before + 1);
}

TEST_CASE("broadcast gradients reduce to the scalar") {
    Graph g;
    Tensor a = Tensor::from_data({3}, {1, 2, 3}, true);
    Tensor s = Tensor::scalar(2.0, true);
    Tensor loss = g.mean(g.mul(a, s)); // = (2/3) sum a_i / 2... mean over 3
    g.backward(loss);
    CHECK(s.grad()[0] == doctest::Approx((1.0 + 2.0 + 3.0) / 3.0).epsilon(1e-12));
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(a.grad()[i] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}
