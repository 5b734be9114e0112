// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairkd/tensor.hpp"

namespace fairkd {

struct GroupId {
    std::string attribute_name;
    std::size_t value_index = 0;
    std::string value_name;
};

struct SampleRecord {
    std::string id;
    Tensor image; // [1,H,W]
    GroupId group;
    int class_label = 0;
    int prog_label = 0;
    double latent_severity = 0.0;
};

struct CohortConfig {
    std::size_t n_samples = 1000;
    std::string attribute_name = "group";
    std::vector<std::string> group_names;   // defaults to g0..g{G-1}
    std::vector<double> group_proportions;  // sums to 1; size G
    std::vector<double> noise_std;          // per group, >= 0
    std::vector<double> signal_gain;        // per group, > 0
    double progression_threshold = 0.8;
    std::size_t image_h = 16;
    std::size_t image_w = 16;
    std::uint64_t seed = 0;
};

// The progression label is [s + noise > threshold] with this fixed noise std.
inline constexpr double kProgNoiseStd = 0.05;

/// Throws ConfigError naming the offending key.
void validate_cohort_config(const CohortConfig& cfg);

/// Centered 2-D Gaussian bump, peak coefficient 1, std h/4.
Tensor make_blob(std::size_t h, std::size_t w);

/// Deterministic synthetic cohort. Each sample's random stream depends only
/// on (seed, sample index), so generation order is irrelevant.
std::vector<SampleRecord> generate_cohort(const CohortConfig& cfg);

/// Stratified split by (group, class_label, prog_label). Split 0 is train;
/// global split sizes follow the fractions exactly (largest remainder), every
/// stratum with >= 2 members lands at least one record in train, and each
/// stratum's per-split count stays within 1 of its proportional share.
std::vector<std::vector<SampleRecord>> split_cohort(const std::vector<SampleRecord>& records,
                                                    const std::vector<double>& fractions,
                                                    std::uint64_t seed);

/// manifest.jsonl + tensors.bin, see README for the layout.
void save_dataset(const std::vector<SampleRecord>& records, const std::string& dir);
std::vector<SampleRecord> load_dataset(const std::string& dir);

} // namespace fairkd
