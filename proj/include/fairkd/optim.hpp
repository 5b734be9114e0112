// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "fairkd/tensor.hpp"

namespace fairkd {

struct AdamWConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

/// AdamW with decoupled weight decay: the decay term uses the pre-update
/// parameter value and is added to the bias-corrected Adam step.
class AdamW {
public:
    AdamW(std::vector<Tensor> params, AdamWConfig cfg);

    /// Applies one update from the parameters' current gradients.
    void step();
    /// Zero-fills every parameter's gradient buffer.
    void zero_grad();

    std::size_t t() const { return t_; }
    const AdamWConfig& config() const { return cfg_; }

private:
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    AdamWConfig cfg_;
    std::size_t t_ = 0;
};

} // namespace fairkd
