// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "fairkd/dataset.hpp"
#include "fairkd/graph.hpp"
#include "fairkd/model.hpp"

namespace fairkd {

struct DistillConfig {
    double alpha = 1.0; // image-feature KL weight
    double beta = 0.05; // attribute-feature KL weight
    std::string teacher_checkpoint;
    // Teacher features enter the student's KL terms as constants by default;
    // the teacher is a guide, so the student must not drag it around. Set
    // false to let KL gradients flow into the teacher as well.
    bool freeze_teacher_features = true;
};

/// Rows of both matrices are softmax-normalized over the feature axis, then
/// KL(p||q) summed over dims and averaged over the K rows.
Tensor feature_kl(Graph& g, const Tensor& p_feat, const Tensor& q_feat);

/// alpha * img_kl + beta * attr_kl.
Tensor combined_kl(Graph& g, const Tensor& img_kl, const Tensor& attr_kl, double alpha,
                   double beta);

/// bce_loss(logits, prog_labels) + d_kl.
Tensor pred_loss(Graph& g, const Tensor& logits, const Tensor& prog_labels, const Tensor& d_kl);

struct TransfairEpochStats {
    double l_cls = 0.0;     // teacher classification loss
    double bce = 0.0;       // student BCE component
    double d_kl_img = 0.0;  // unweighted image-feature KL
    double d_kl_attr = 0.0; // unweighted attribute-feature KL
};

struct TransfairResult {
    FairENParams student;
    FairENParams teacher;
    std::vector<TransfairEpochStats> history;
};

/// Per batch the teacher fine-tunes on class labels while the
/// student trains on progression labels plus the feature KL. With
/// alpha=beta=0 the student run is bit-identical to train_fairen.
TransfairResult train_transfair(const std::vector<SampleRecord>& prog_records,
                                FairENParams teacher, const TrainConfig& student_cfg,
                                const DistillConfig& distill_cfg);

} // namespace fairkd
