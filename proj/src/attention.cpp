// SPDX-License-Identifier: Apache-2.0
#include "fairkd/attention.hpp"

#include <cmath>

#include "fairkd/errors.hpp"

namespace fairkd {

AttentionOut fair_attention(Graph& g, const FairAttentionParams& p, const Tensor& h,
                            const Tensor& h_attr) {
    const std::size_t d = p.wq.shape()[0];
    const auto square = [d](const Tensor& w) {
        return w.rank() == 2 && w.shape()[0] == d && w.shape()[1] == d;
    };
    if (!square(p.wq) || !square(p.wk) || !square(p.wv)) {
        throw DimensionError("fair_attention: weight matrices must all be [" +
                             std::to_string(d) + ", " + std::to_string(d) + "]");
    }
    const auto row = [d](const Tensor& t) {
        return t.rank() == 2 && t.shape()[0] == 1 && t.shape()[1] == d;
    };
    if (!row(h) || !row(h_attr)) {
        throw DimensionError("fair_attention: expected feature rows [1, " + std::to_string(d) +
                             "], got " + shape_to_string(h.shape()) + " and " +
                             shape_to_string(h_attr.shape()));
    }
    Tensor hq = g.matmul(h_attr, p.wq);
    Tensor hk = g.matmul(h, p.wk);
    Tensor scores = g.mul_const(g.mul(hq, hk), 1.0 / std::sqrt(static_cast<double>(d)));
    Tensor v = g.softmax(scores, 1);
    Tensor h_out = g.mul(g.matmul(h, p.wv), v);
    return {h_out, v};
}

} // namespace fairkd
