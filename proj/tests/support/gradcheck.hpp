// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "doctest.h"
#include "fairkd/graph.hpp"
#include "fairkd/rng.hpp"
#include "fairkd/tensor.hpp"

namespace testsup {

// Builds a scalar loss from the given leaves inside the given graph.
using LossBuilder =
    std::function<fairkd::Tensor(fairkd::Graph&, const std::vector<fairkd::Tensor>&)>;

inline double loss_value(const LossBuilder& build, const std::vector<fairkd::Tensor>& leaves) {
    fairkd::Graph g;
    return build(g, leaves).value();
}

// Central finite differences against the recorded backward pass.
// rel = |a - fd| / max(1, |a|, |fd|) must stay below tol for every element.
inline void check_gradients(const LossBuilder& build, const std::vector<fairkd::Tensor>& leaves,
                            double h = 1e-6, double tol = 1e-4) {
    for (fairkd::Tensor t : leaves) {
        REQUIRE(t.requires_grad());
        t.zero_grad();
    }
    {
        fairkd::Graph g;
        fairkd::Tensor loss = build(g, leaves);
        g.backward(loss);
    }
    for (std::size_t li = 0; li < leaves.size(); ++li) {
        fairkd::Tensor t = leaves[li];
        const std::vector<double> analytic = t.grad();
        for (std::size_t i = 0; i < t.numel(); ++i) {
            const double x0 = t.data()[i];
            t.data()[i] = x0 + h;
            const double fp = loss_value(build, leaves);
            t.data()[i] = x0 - h;
            const double fm = loss_value(build, leaves);
            t.data()[i] = x0;
            const double fd = (fp - fm) / (2.0 * h);
            const double a = analytic[i];
            const double rel = std::abs(a - fd) / std::max({1.0, std::abs(a), std::abs(fd)});
            INFO("leaf ", li, " element ", i, ": analytic ", a, " fd ", fd);
            CHECK(rel < tol);
        }
    }
}

inline fairkd::Tensor rand_tensor(fairkd::Rng& rng, fairkd::Shape shape, double lo, double hi,
                                  bool requires_grad = true) {
    std::vector<double> v(fairkd::shape_numel(shape));
    for (auto& x : v) x = rng.uniform(lo, hi);
    return fairkd::Tensor::from_data(std::move(shape), std::move(v), requires_grad);
}

} // namespace testsup
