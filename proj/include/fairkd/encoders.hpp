// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "fairkd/graph.hpp"
#include "fairkd/tensor.hpp"

namespace fairkd {

inline constexpr std::size_t kConvChannels = 8;
inline constexpr std::size_t kMlpHidden = 64;

// conv3x3 -> relu -> conv3x3 -> relu -> global average pool -> linear -> relu
struct ConvBackboneParams {
    Tensor k1; // [8,1,3,3]
    Tensor b1; // [8]
    Tensor k2; // [8,8,3,3]
    Tensor b2; // [8]
    Tensor w;  // [8,d]
    Tensor b;  // [1,d]
};

// flatten -> linear(HW->64) -> relu -> linear(64->d) -> relu
struct MlpBackboneParams {
    Tensor w1; // [HW,64]
    Tensor b1; // [1,64]
    Tensor w2; // [64,d]
    Tensor b2; // [1,d]
};

struct BackboneParams {
    std::variant<ConvBackboneParams, MlpBackboneParams> layers;
    std::size_t feature_dim = 64;
    std::size_t image_h = 16;
    std::size_t image_w = 16;

    std::string variant() const {
        return std::holds_alternative<ConvBackboneParams>(layers) ? "conv" : "mlp";
    }
};

// linear(G->d) -> relu -> linear(d->d)
struct AttrEncoderParams {
    Tensor w1; // [G,d]
    Tensor b1; // [1,d]
    Tensor w2; // [d,d]
    Tensor b2; // [1,d]
};

/// image [1,H,W] -> feature row [1,d].
Tensor backbone_encode(Graph& g, const BackboneParams& p, const Tensor& image);

/// one_hot [1,G] (exactly one 1, rest 0) -> feature row [1,d].
Tensor attribute_encode(Graph& g, const AttrEncoderParams& p, const Tensor& one_hot);

/// Builds the [1,G] one-hot row for a group index.
Tensor one_hot_row(std::size_t index, std::size_t group_count);

} // namespace fairkd
