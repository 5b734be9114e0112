// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairkd/dataset.hpp"
#include "fairkd/model.hpp"

namespace fairkd {

/// Mann-Whitney AUC with midrank tie handling. Throws UndefinedAucError when
/// only one class is present.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

/// roc_auc restricted to each group; groups lacking both classes map to
/// nullopt ("undefined").
std::map<std::string, std::optional<double>> group_auc(const std::vector<double>& scores,
                                                       const std::vector<int>& labels,
                                                       const std::vector<std::string>& groups);

/// overall / (1 + sum |overall - group|). An empty group list returns overall
/// unchanged; callers flag that case.
double es_auc(double overall, const std::vector<double>& group_aucs);

struct EvalReport {
    std::string attribute_name;
    double overall_auc = 0.0;
    // Ordered by first appearance of each group in the dataset.
    std::vector<std::pair<std::string, std::optional<double>>> group_aucs;
    double es_auc = 0.0;
    std::vector<std::pair<std::string, std::size_t>> n_per_group;
    bool no_defined_groups = false;
};

/// Fixed key order {attribute_name, overall_auc, group_aucs, es_auc, n},
/// floats with 6 decimal places; byte-stable across runs.
std::string report_to_json(const EvalReport& r);

/// Scores every record with sigma(logit) and evaluates against the chosen
/// label. Undefined single-class groups are excluded from the ES-AUC sum.
EvalReport evaluate_model(const FairENParams& params, const std::vector<SampleRecord>& records,
                          LabelKind kind);

} // namespace fairkd
