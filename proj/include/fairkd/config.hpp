// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "fairkd/dataset.hpp"
#include "fairkd/distill.hpp"
#include "fairkd/model.hpp"

namespace fairkd {

/// In-memory form of the run config file: flat INI-style sections [cohort],
/// [train], [distill], [eval]; '#' or ';' comments; comma-separated lists.
/// Unknown sections or keys are rejected with the offending key path.
struct RunConfig {
    CohortConfig cohort;
    std::vector<double> split_fractions = {0.7, 0.3};
    TrainConfig train;
    DistillConfig distill;
    std::string eval_attribute; // empty: use the dataset's attribute
    std::string eval_label = "class";
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

} // namespace fairkd
