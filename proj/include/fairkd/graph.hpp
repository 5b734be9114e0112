// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "fairkd/tensor.hpp"

namespace fairkd {

/// Tape-based reverse-mode autodiff.
///
/// Each op validates shapes, computes the forward value, and when the result
/// requires grad records a node whose closure pushes gradients into the op's
/// inputs. backward(loss) seeds d loss/d loss = 1 and replays the tape in
/// reverse. Gradients of leaf tensors (those not produced by this graph)
/// accumulate across backward calls until zeroed; gradients of intermediates
/// are dropped once consumed, so several losses recorded on one tape can be
/// differentiated independently.
///
/// A Graph and the tensors it creates are confined to one thread.
class Graph {
public:
    Tensor matmul(const Tensor& a, const Tensor& b);
    Tensor conv2d(const Tensor& x, const Tensor& kernels);

    Tensor add(const Tensor& a, const Tensor& b);
    Tensor sub(const Tensor& a, const Tensor& b);
    Tensor mul(const Tensor& a, const Tensor& b);
    Tensor add_const(const Tensor& a, double c);
    Tensor mul_const(const Tensor& a, double c);

    Tensor sigmoid(const Tensor& x);
    Tensor log(const Tensor& x); // input clamped to >= kLogClamp
    Tensor relu(const Tensor& x);
    Tensor softmax(const Tensor& x, std::size_t axis);
    Tensor mean(const Tensor& x); // -> shape {1}

    Tensor global_avg_pool(const Tensor& x);                 // [c,h,w] -> [1,c]
    Tensor flatten(const Tensor& x);                         // -> [1,numel]
    Tensor stack_rows(const std::vector<Tensor>& rows);      // K rows of n -> [K,n]
    Tensor bias_channels(const Tensor& x, const Tensor& b);  // [c,h,w] + [c]

    /// Seeds grad 1 at loss (scalar) and sweeps the tape in reverse.
    void backward(const Tensor& loss);

    std::size_t node_count() const { return nodes_.size(); }

    static constexpr double kLogClamp = 1e-8;

private:
    struct Node {
        Tensor out;
        std::function<void()> back;
    };
    std::vector<Node> nodes_;

    void record(Tensor out, std::function<void()> back);
};

} // namespace fairkd
