// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fairkd/graph.hpp"
#include "fairkd/tensor.hpp"

namespace fairkd {

struct FairAttentionParams {
    Tensor wq; // [d,d]
    Tensor wk; // [d,d]
    Tensor wv; // [d,d]
};

struct AttentionOut {
    Tensor h_out; // [1,d]
    Tensor v;     // [1,d] attention weights, for diagnostics
};

/// Fairness-aware attention over pooled feature rows:
///   h_q = h_attr W_q, h_k = h W_k, v = softmax((h_q * h_k) / sqrt(d)),
///   h_out = (h W_v) * v, with * elementwise. v gates the d feature channels;
/// with single pooled vectors an inner product would make the softmax
/// degenerate, so the product is read elementwise.
AttentionOut fair_attention(Graph& g, const FairAttentionParams& p, const Tensor& h,
                            const Tensor& h_attr);

} // namespace fairkd
