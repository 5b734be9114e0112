// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairkd/attention.hpp"
#include "fairkd/dataset.hpp"
#include "fairkd/encoders.hpp"
#include "fairkd/graph.hpp"
#include "fairkd/tensor.hpp"

namespace fairkd {

enum class LabelKind { Class, Progression };

struct FairENParams {
    BackboneParams backbone;
    AttrEncoderParams attr_encoder;
    FairAttentionParams attention;
    Tensor head_w; // [d,1]
    Tensor head_b; // [1,1]
    bool attention_enabled = true;
    std::size_t group_count = 2;

    /// All parameter tensors in declared order: backbone, attribute encoder,
    /// attention, head. This order fixes both initialization draws and the
    /// checkpoint binary layout.
    std::vector<Tensor> parameters() const;

    /// The subset the optimizer updates. With attention disabled the head
    /// reads raw backbone features, so the attribute encoder and attention
    /// weights stay frozen at their initial values.
    std::vector<Tensor> trainable_parameters() const;

    /// Deep copy. Tensors are shared handles, so plain struct copies alias
    /// the same weights; training mutates them in place.
    FairENParams clone() const;
};

struct TrainConfig {
    std::size_t d = 64;
    double lr = 1e-4;
    std::size_t epochs = 10;
    std::size_t batch = 6;
    double alpha = 1.0;
    double beta = 0.05;
    std::uint64_t seed = 0;
    std::string backbone = "conv"; // "conv" | "mlp"
    bool attention_enabled = true;
};

/// Fresh parameters, fan-based uniform for matrices and kernels, zero biases.
/// Draws come from mix_seed(cfg.seed, kStreamInit) in parameters() order.
FairENParams init_fairen(const TrainConfig& cfg, std::size_t group_count,
                         std::size_t image_h, std::size_t image_w);

struct ForwardOut {
    Tensor logit;  // [1,1] raw score; sigma is applied in the loss
    Tensor h;      // [1,d] feature the head consumed (post-attention when enabled)
    Tensor h_attr; // [1,d] attribute feature
};

ForwardOut fairen_forward(Graph& g, const FairENParams& p, const Tensor& image,
                          const Tensor& group_one_hot);

/// -(1/K) sum of y log sigma(x) + (1-y) log(1-sigma(x)); the log clamp bounds
/// sigma away from {0,1} by 1e-8.
Tensor bce_loss(Graph& g, const Tensor& logits, const Tensor& labels);

int label_of(const SampleRecord& r, LabelKind kind);

struct TrainResult {
    FairENParams params;
    std::vector<double> loss_history; // per-epoch mean loss over samples
};

/// Epochs of shuffled mini-batches, BCE, AdamW.
TrainResult train_fairen(const std::vector<SampleRecord>& records, const TrainConfig& cfg,
                         LabelKind kind);

/// Checkpoint directory: model.json (metadata + shapes) and params.bin
/// (little-endian doubles in parameters() order). Round-trips bit-exactly.
void save_checkpoint(const FairENParams& params, const std::string& dir);
FairENParams load_checkpoint(const std::string& dir);

} // namespace fairkd
