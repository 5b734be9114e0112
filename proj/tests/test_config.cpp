// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "fairkd/config.hpp"
#include "fairkd/errors.hpp"

using fairkd::parse_run_config;
using fairkd::RunConfig;

TEST_CASE("an empty document yields the documented defaults") {
    RunConfig cfg = parse_run_config("");
    CHECK(cfg.cohort.n_samples == 1000);
    CHECK(cfg.cohort.attribute_name == "group");
    CHECK(cfg.cohort.group_names.empty()); // synthesized as g0, g1 at generation
    CHECK(cfg.cohort.group_proportions == std::vector<double>{0.5, 0.5});
    CHECK(cfg.cohort.noise_std == std::vector<double>{0.25, 0.25});
    CHECK(cfg.cohort.signal_gain == std::vector<double>{1.0, 1.0});
    CHECK(cfg.cohort.progression_threshold == 0.8);
    CHECK(cfg.cohort.image_h == 16);
    CHECK(cfg.cohort.image_w == 16);
    CHECK(cfg.split_fractions == std::vector<double>{0.7, 0.3});
    CHECK(cfg.train.d == 64);
    CHECK(cfg.train.lr == 1e-4);
    CHECK(cfg.train.epochs == 10);
    CHECK(cfg.train.batch == 6);
    CHECK(cfg.train.alpha == 1.0);
    CHECK(cfg.train.beta == 0.05);
    CHECK(cfg.train.backbone == "conv");
    CHECK(cfg.train.attention_enabled);
    CHECK(cfg.distill.alpha == 1.0);
    CHECK(cfg.distill.beta == 0.05);
    CHECK(cfg.distill.freeze_teacher_features);
    CHECK(cfg.eval_attribute.empty());
    CHECK(cfg.eval_label == "class");
}

TEST_CASE("a full document round-trips every field") {
    const std::string text = R"(
# cohort shape
[cohort]
n_samples = 120
attribute_name = race           ; trailing comment
group_names = asian, black, white
group_proportions = 0.3, 0.3, 0.4
noise_std = 0.1, 0.2, 0.3
signal_gain = 1.0, 0.9, 0.8
progression_threshold = 0.75
image_h = 12
image_w = 10
seed = 99
split_fractions = 0.6, 0.2, 0.2

[train]
d = 32
lr = 0.003
epochs = 4
batch = 8
alpha = 0.5
beta = 0.01
seed = 7
backbone = mlp
attention = false

[distill]
alpha = 2.0
beta = 0.0
teacher_checkpoint = /tmp/teacher
freeze_teacher_features = false

[eval]
attribute = race
label = prog
)";
    RunConfig cfg = parse_run_config(text);
    CHECK(cfg.cohort.n_samples == 120);
    CHECK(cfg.cohort.attribute_name == "race");
    CHECK(cfg.cohort.group_names == std::vector<std::string>{"asian", "black", "white"});
    CHECK(cfg.cohort.group_proportions == std::vector<double>{0.3, 0.3, 0.4});
    CHECK(cfg.cohort.noise_std == std::vector<double>{0.1, 0.2, 0.3});
    CHECK(cfg.cohort.signal_gain == std::vector<double>{1.0, 0.9, 0.8});
    CHECK(cfg.cohort.progression_threshold == 0.75);
    CHECK(cfg.cohort.image_h == 12);
    CHECK(cfg.cohort.image_w == 10);
    CHECK(cfg.cohort.seed == 99);
    CHECK(cfg.split_fractions == std::vector<double>{0.6, 0.2, 0.2});
    CHECK(cfg.train.d == 32);
    CHECK(cfg.train.lr == 0.003);
    CHECK(cfg.train.epochs == 4);
    CHECK(cfg.train.batch == 8);
    CHECK(cfg.train.alpha == 0.5);
    CHECK(cfg.train.beta == 0.01);
    CHECK(cfg.train.seed == 7);
    CHECK(cfg.train.backbone == "mlp");
    CHECK_FALSE(cfg.train.attention_enabled);
    CHECK(cfg.distill.alpha == 2.0);
    CHECK(cfg.distill.beta == 0.0);
    CHECK(cfg.distill.teacher_checkpoint == "/tmp/teacher");
    CHECK_FALSE(cfg.distill.freeze_teacher_features);
    CHECK(cfg.eval_attribute == "race");
    CHECK(cfg.eval_label == "prog");
}

TEST_CASE("comments, blank lines and whitespace are tolerated") {
    RunConfig cfg = parse_run_config("\n\n# lead\n  [train]  \n   d =  16  # tail\n\n;whole\n");
    CHECK(cfg.train.d == 16);
}

TEST_CASE("unknown keys and sections are named in full") {
    CHECK_THROWS_WITH_AS(parse_run_config("[cohort]\nn_sample = 5\n"),
                         doctest::Contains("cohort.n_sample: unknown key"), fairkd::ConfigError);
    CHECK_THROWS_WITH_AS(parse_run_config("[train]\nmomentum = 0.9\n"),
                         doctest::Contains("train.momentum"), fairkd::ConfigError);
    CHECK_THROWS_WITH_AS(parse_run_config("[model]\nd = 4\n"), doctest::Contains("[model]"),
                         fairkd::ConfigError);
}

TEST_CASE("malformed values name the key path") {
    CHECK_THROWS_WITH_AS(parse_run_config("[train]\nlr = fast\n"),
                         doctest::Contains("train.lr: cannot parse \"fast\""),
                         fairkd::ConfigError);
    CHECK_THROWS_WITH_AS(parse_run_config("[train]\nepochs = -3\n"),
                         doctest::Contains("train.epochs"), fairkd::ConfigError);
    CHECK_THROWS_WITH_AS(parse_run_config("[train]\nattention = maybe\n"),
                         doctest::Contains("boolean"), fairkd::ConfigError);
    CHECK_THROWS_WITH_AS(parse_run_config("[cohort]\nnoise_std = 0.1, x\n"),
                         doctest::Contains("cohort.noise_std"), fairkd::ConfigError);
}

TEST_CASE("structural errors carry line numbers") {
    CHECK_THROWS_WITH_AS(parse_run_config("[cohort\nn_samples = 5\n"),
                         doctest::Contains("line 1"), fairkd::ConfigError);
    CHECK_THROWS_WITH_AS(parse_run_config("[cohort]\njust words\n"), doctest::Contains("line 2"),
                         fairkd::ConfigError);
    CHECK_THROWS_WITH_AS(parse_run_config("d = 4\n"), doctest::Contains("outside any section"),
                         fairkd::ConfigError);
}

TEST_CASE("semantic validation names the offending field") {
    CHECK_THROWS_WITH_AS(parse_run_config("[cohort]\ngroup_proportions = 0.6, 0.3\n"),
                         doctest::Contains("group_proportions"), fairkd::ConfigError);
    CHECK_THROWS_WITH_AS(parse_run_config("[cohort]\nsplit_fractions = 0.5, 0.2\n"),
                         doctest::Contains("split_fractions"), fairkd::ConfigError);
    CHECK_THROWS_WITH_AS(parse_run_config("[cohort]\nsplit_fractions = 0.4,0.3,0.2,0.1\n"),
                         doctest::Contains("at most 3"), fairkd::ConfigError);
    CHECK_THROWS_WITH_AS(parse_run_config("[train]\nbackbone = vit\n"),
                         doctest::Contains("train.backbone"), fairkd::ConfigError);
    CHECK_THROWS_WITH_AS(parse_run_config("[train]\nlr = 0\n"), doctest::Contains("train.lr"),
                         fairkd::ConfigError);
    CHECK_THROWS_WITH_AS(parse_run_config("[train]\nbatch = 0\n"),
                         doctest::Contains("train.batch"), fairkd::ConfigError);
    CHECK_THROWS_WITH_AS(parse_run_config("[distill]\nalpha = -1\n"),
                         doctest::Contains("distill.alpha"), fairkd::ConfigError);
    CHECK_THROWS_WITH_AS(parse_run_config("[eval]\nlabel = severity\n"),
                         doctest::Contains("eval.label"), fairkd::ConfigError);
    // Per-group lists must match the group count.
    CHECK_THROWS_WITH_AS(
        parse_run_config("[cohort]\ngroup_names = a, b, c\ngroup_proportions = 0.3,0.3,0.4\n"),
        doctest::Contains("noise_std"), fairkd::ConfigError);
}

TEST_CASE("load_run_config reads files and reports missing ones") {
    namespace fs = std::filesystem;
    const fs::path p = fs::temp_directory_path() / "fairkd_cfg_test.ini";
    {
        std::ofstream f(p);
        f << "[train]\nd = 24\n";
    }
    CHECK(fairkd::load_run_config(p.string()).train.d == 24);
    fs::remove(p);
    CHECK_THROWS_WITH_AS(fairkd::load_run_config(p.string()), doctest::Contains("cannot open"),
                         fairkd::ConfigError);
}
