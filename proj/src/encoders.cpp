// SPDX-License-Identifier: Apache-2.0
#include "fairkd/encoders.hpp"

#include <cmath>

#include "fairkd/errors.hpp"

namespace fairkd {

Tensor backbone_encode(Graph& g, const BackboneParams& p, const Tensor& image) {
    if (image.rank() != 3 || image.shape()[0] != 1 || image.shape()[1] != p.image_h ||
        image.shape()[2] != p.image_w) {
        throw DimensionError("backbone_encode: expected image [1, " + std::to_string(p.image_h) +
                             ", " + std::to_string(p.image_w) + "], got " +
                             shape_to_string(image.shape()));
    }
    if (const auto* c = std::get_if<ConvBackboneParams>(&p.layers)) {
        Tensor x = g.relu(g.bias_channels(g.conv2d(image, c->k1), c->b1));
        x = g.relu(g.bias_channels(g.conv2d(x, c->k2), c->b2));
        Tensor pooled = g.global_avg_pool(x); // [1,8]
        return g.relu(g.add(g.matmul(pooled, c->w), c->b));
    }
    const auto& m = std::get<MlpBackboneParams>(p.layers);
    Tensor x = g.flatten(image); // [1,HW]
    x = g.relu(g.add(g.matmul(x, m.w1), m.b1));
    return g.relu(g.add(g.matmul(x, m.w2), m.b2));
}

Tensor attribute_encode(Graph& g, const AttrEncoderParams& p, const Tensor& one_hot) {
    const std::size_t groups = p.w1.shape()[0];
    if (one_hot.rank() != 2 || one_hot.shape()[0] != 1 || one_hot.shape()[1] != groups) {
        throw DimensionError("attribute_encode: expected one-hot [1, " + std::to_string(groups) +
                             "], got " + shape_to_string(one_hot.shape()));
    }
    std::size_t ones = 0;
    for (double x : one_hot.data()) {
        if (x == 1.0)
            ++ones;
        else if (x != 0.0)
            throw ContractError("attribute_encode: input is not one-hot (entry " +
                                std::to_string(x) + ")");
    }
    if (ones != 1)
        throw ContractError("attribute_encode: input has " + std::to_string(ones) +
                            " ones, expected exactly 1");
    Tensor x = g.relu(g.add(g.matmul(one_hot, p.w1), p.b1));
    return g.add(g.matmul(x, p.w2), p.b2);
}

Tensor one_hot_row(std::size_t index, std::size_t group_count) {
    if (index >= group_count) {
        throw ContractError("one_hot_row: index " + std::to_string(index) +
                            " out of range for " + std::to_string(group_count) + " groups");
    }
    Tensor t = Tensor::zeros({1, group_count});
    t.data()[index] = 1.0;
    return t;
}

} // namespace fairkd
