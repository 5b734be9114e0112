// SPDX-License-Identifier: Apache-2.0
#include "fairkd/distill.hpp"

#include <algorithm>
#include <cmath>

#include "fairkd/errors.hpp"
#include "fairkd/optim.hpp"
#include "fairkd/rng.hpp"

namespace fairkd {

Tensor feature_kl(Graph& g, const Tensor& p_feat, const Tensor& q_feat) {
    if (p_feat.rank() != 2 || p_feat.shape() != q_feat.shape()) {
        throw ContractError("feature_kl: expected matching [K,d] features, got " +
                            shape_to_string(p_feat.shape()) + " and " +
                            shape_to_string(q_feat.shape()));
    }
    const std::size_t d = p_feat.shape()[1];
    Tensor p = g.softmax(p_feat, 1);
    Tensor q = g.softmax(q_feat, 1);
    Tensor elem = g.mul(p, g.sub(g.log(p), g.log(q)));
    // mean over K*d entries, rescaled by d: sum over dims, mean over rows.
    return g.mul_const(g.mean(elem), static_cast<double>(d));
}

Tensor combined_kl(Graph& g, const Tensor& img_kl, const Tensor& attr_kl, double alpha,
                   double beta) {
    if (img_kl.numel() != 1 || attr_kl.numel() != 1)
        throw ContractError("combined_kl: inputs must be scalars");
    return g.add(g.mul_const(img_kl, alpha), g.mul_const(attr_kl, beta));
}

Tensor pred_loss(Graph& g, const Tensor& logits, const Tensor& prog_labels, const Tensor& d_kl) {
    if (d_kl.numel() != 1) throw ContractError("pred_loss: d_kl must be scalar");
    return g.add(bce_loss(g, logits, prog_labels), d_kl);
}

namespace {

Tensor detached_rows(const std::vector<Tensor>& rows) {
    const std::size_t k = rows.size(), n = rows[0].numel();
    Tensor out = Tensor::zeros({k, n});
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < n; ++j) out.data()[i * n + j] = rows[i].data()[j];
    return out;
}

} // namespace

TransfairResult train_transfair(const std::vector<SampleRecord>& prog_records,
                                FairENParams teacher, const TrainConfig& student_cfg,
                                const DistillConfig& distill_cfg) {
    teacher = teacher.clone(); // tensors are shared handles; keep the caller's copy intact
    if (prog_records.empty()) throw ContractError("train_transfair: empty dataset");
    if (student_cfg.batch == 0) throw ConfigError("batch: must be positive");
    if (student_cfg.batch > prog_records.size())
        throw ConfigError("batch: " + std::to_string(student_cfg.batch) +
                          " exceeds dataset size " + std::to_string(prog_records.size()));
    if (!(distill_cfg.alpha >= 0.0) || !std::isfinite(distill_cfg.alpha))
        throw ConfigError("alpha: must be finite and >= 0");
    if (!(distill_cfg.beta >= 0.0) || !std::isfinite(distill_cfg.beta))
        throw ConfigError("beta: must be finite and >= 0");
    for (const SampleRecord& r : prog_records) {
        if (r.class_label != 0 && r.class_label != 1)
            throw ContractError("train_transfair: teacher requires classification labels "
                                "(record " + r.id + ")");
    }

    std::size_t groups = 0;
    for (const SampleRecord& r : prog_records)
        groups = std::max(groups, r.group.value_index + 1);
    if (teacher.group_count != groups) {
        throw ContractError("train_transfair: teacher was trained with " +
                            std::to_string(teacher.group_count) + " groups, dataset has " +
                            std::to_string(groups));
    }
    const Shape& ishape = prog_records[0].image.shape();
    if (teacher.backbone.image_h != ishape[1] || teacher.backbone.image_w != ishape[2]) {
        throw ContractError("train_transfair: teacher expects images " +
                            std::to_string(teacher.backbone.image_h) + "x" +
                            std::to_string(teacher.backbone.image_w) + ", dataset has " +
                            shape_to_string(ishape));
    }

    const bool kl_on = distill_cfg.alpha > 0.0 || distill_cfg.beta > 0.0;
    FairENParams student = init_fairen(student_cfg, groups, ishape[1], ishape[2]);
    // The history diagnostics compare features even at alpha=beta=0, so the
    // teacher and student must agree on d unconditionally.
    if (student.backbone.feature_dim != teacher.backbone.feature_dim) {
        throw ContractError("train_transfair: student d " +
                            std::to_string(student.backbone.feature_dim) +
                            " differs from teacher d " +
                            std::to_string(teacher.backbone.feature_dim));
    }

    AdamWConfig ocfg;
    ocfg.lr = student_cfg.lr; // teacher and student share one rate
    AdamW teacher_opt(teacher.trainable_parameters(), ocfg);
    AdamW student_opt(student.trainable_parameters(), ocfg);

    const std::size_t n = prog_records.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::vector<TransfairEpochStats> history;

    for (std::size_t epoch = 0; epoch < student_cfg.epochs; ++epoch) {
        Rng perm(mix_seed(student_cfg.seed, kStreamEpoch + epoch));
        perm.shuffle(order);
        TransfairEpochStats acc;
        for (std::size_t start = 0, b = 0; start < n; start += student_cfg.batch, ++b) {
            const std::size_t k = std::min(student_cfg.batch, n - start);
            teacher_opt.zero_grad();
            student_opt.zero_grad();
            Graph g;
            std::vector<Tensor> t_logits, s_logits, t_h, s_h, t_attr, s_attr;
            Tensor cls_labels = Tensor::zeros({k, 1});
            Tensor prog_labels = Tensor::zeros({k, 1});
            for (std::size_t j = 0; j < k; ++j) {
                const SampleRecord& r = prog_records[order[start + j]];
                Tensor oh = one_hot_row(r.group.value_index, groups);
                ForwardOut t = fairen_forward(g, teacher, r.image, oh);
                ForwardOut s = fairen_forward(g, student, r.image, oh);
                t_logits.push_back(t.logit);
                t_h.push_back(t.h);
                t_attr.push_back(t.h_attr);
                s_logits.push_back(s.logit);
                s_h.push_back(s.h);
                s_attr.push_back(s.h_attr);
                cls_labels.data()[j] = static_cast<double>(r.class_label);
                prog_labels.data()[j] = static_cast<double>(r.prog_label);
            }

            Tensor l_cls = bce_loss(g, g.stack_rows(t_logits), cls_labels);
            Tensor s_bce = bce_loss(g, g.stack_rows(s_logits), prog_labels);

            // Raw KL diagnostics on detached copies; these record no nodes.
            Tensor t_h_det = detached_rows(t_h);
            Tensor t_attr_det = detached_rows(t_attr);
            const double kl_img = feature_kl(g, t_h_det, detached_rows(s_h)).value();
            const double kl_attr = feature_kl(g, t_attr_det, detached_rows(s_attr)).value();

            Tensor l_pred = s_bce;
            if (kl_on) {
                // With frozen teacher features the KL sees constants on the
                // teacher side; otherwise its gradient reaches the teacher.
                Tensor tp_h = distill_cfg.freeze_teacher_features ? t_h_det : g.stack_rows(t_h);
                Tensor tp_attr =
                    distill_cfg.freeze_teacher_features ? t_attr_det : g.stack_rows(t_attr);
                Tensor img_kl = feature_kl(g, tp_h, g.stack_rows(s_h));
                Tensor attr_kl = feature_kl(g, tp_attr, g.stack_rows(s_attr));
                Tensor d_kl = combined_kl(g, img_kl, attr_kl, distill_cfg.alpha, distill_cfg.beta);
                l_pred = g.add(s_bce, d_kl);
            }

            if (!std::isfinite(l_cls.value()) || !std::isfinite(l_pred.value())) {
                throw TrainingError("train_transfair: non-finite loss at epoch " +
                                    std::to_string(epoch) + ", batch " + std::to_string(b));
            }
            g.backward(l_cls);
            g.backward(l_pred);
            teacher_opt.step();
            student_opt.step();

            const double w = static_cast<double>(k);
            acc.l_cls += l_cls.value() * w;
            acc.bce += s_bce.value() * w;
            acc.d_kl_img += kl_img * w;
            acc.d_kl_attr += kl_attr * w;
        }
        const double dn = static_cast<double>(n);
        history.push_back({acc.l_cls / dn, acc.bce / dn, acc.d_kl_img / dn, acc.d_kl_attr / dn});
    }
    return {std::move(student), std::move(teacher), std::move(history)};
}

} // namespace fairkd
