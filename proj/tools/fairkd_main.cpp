// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fairkd/config.hpp"
#include "fairkd/dataset.hpp"
#include "fairkd/distill.hpp"
#include "fairkd/errors.hpp"
#include "fairkd/metrics.hpp"
#include "fairkd/model.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

fairkd::LabelKind parse_label(const std::string& s) {
    if (s == "class") return fairkd::LabelKind::Class;
    if (s == "prog") return fairkd::LabelKind::Progression;
    throw fairkd::ConfigError("label: expected \"class\" or \"prog\", got \"" + s + "\"");
}

std::vector<fairkd::SampleRecord> load_train_split(const std::string& dir) {
    if (fs::exists(fs::path(dir) / "manifest.jsonl")) return fairkd::load_dataset(dir);
    const fs::path t = fs::path(dir) / "train";
    if (fs::exists(t / "manifest.jsonl")) return fairkd::load_dataset(t.string());
    throw fairkd::FormatError("no dataset at " + dir + " (expected manifest.jsonl or train/)");
}

std::vector<fairkd::SampleRecord> load_eval_split(const std::string& dir) {
    if (fs::exists(fs::path(dir) / "manifest.jsonl")) return fairkd::load_dataset(dir);
    const fs::path t = fs::path(dir) / "test";
    if (fs::exists(t / "manifest.jsonl")) return fairkd::load_dataset(t.string());
    throw fairkd::FormatError("no dataset at " + dir + " (expected manifest.jsonl or test/)");
}

void check_attribute(const std::string& requested, const std::vector<fairkd::SampleRecord>& recs) {
    if (requested.empty()) return;
    const std::string& have = recs[0].group.attribute_name;
    if (requested != have)
        throw fairkd::ConfigError("attribute: dataset carries \"" + have + "\", not \"" +
                                  requested + "\"");
}

std::string fmt6(double x) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6f", x);
    return buf;
}

int cmd_gen_data(const fairkd::RunConfig& cfg, const std::string& out) {
    auto records = fairkd::generate_cohort(cfg.cohort);
    auto splits = fairkd::split_cohort(records, cfg.split_fractions, cfg.cohort.seed);
    static const char* kNames2[] = {"train", "test"};
    static const char* kNames3[] = {"train", "val", "test"};
    std::vector<std::string> names;
    if (splits.size() == 1)
        names = {"train"};
    else if (splits.size() == 2)
        names = {kNames2[0], kNames2[1]};
    else
        names = {kNames3[0], kNames3[1], kNames3[2]};
    for (std::size_t i = 0; i < splits.size(); ++i)
        fairkd::save_dataset(splits[i], (fs::path(out) / names[i]).string());

    const std::size_t g = cfg.cohort.group_proportions.size();
    std::vector<std::size_t> n(g, 0), ncls(g, 0), nprog(g, 0);
    std::vector<std::string> gnames(g);
    for (const auto& r : records) {
        const std::size_t gi = r.group.value_index;
        n[gi] += 1;
        ncls[gi] += static_cast<std::size_t>(r.class_label);
        nprog[gi] += static_cast<std::size_t>(r.prog_label);
        gnames[gi] = r.group.value_name;
    }
    std::printf("cohort: n=%zu groups=%zu seed=%llu\n", records.size(), g,
                static_cast<unsigned long long>(cfg.cohort.seed));
    for (std::size_t gi = 0; gi < g; ++gi) {
        const double dn = n[gi] ? static_cast<double>(n[gi]) : 1.0;
        std::printf("group %s: n=%zu class_rate=%s prog_rate=%s\n",
                    gnames[gi].empty() ? ("g" + std::to_string(gi)).c_str() : gnames[gi].c_str(),
                    n[gi], fmt6(static_cast<double>(ncls[gi]) / dn).c_str(),
                    fmt6(static_cast<double>(nprog[gi]) / dn).c_str());
    }
    for (std::size_t i = 0; i < splits.size(); ++i)
        std::printf("split %s: %zu\n", names[i].c_str(), splits[i].size());
    return 0;
}

void write_history_cls(const std::string& path, const std::vector<double>& hist) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw fairkd::FormatError("cannot open " + path);
    for (std::size_t i = 0; i < hist.size(); ++i) {
        ordered_json j;
        j["epoch"] = i;
        j["loss"] = hist[i];
        f << j.dump() << "\n";
    }
}

int cmd_train_cls(const fairkd::RunConfig& cfg, const std::string& data, const std::string& out,
                  fairkd::LabelKind kind) {
    auto train_recs = load_train_split(data);
    fairkd::TrainResult res = fairkd::train_fairen(train_recs, cfg.train, kind);
    fs::create_directories(out);
    fairkd::save_checkpoint(res.params, (fs::path(out) / "checkpoint").string());
    write_history_cls((fs::path(out) / "history.jsonl").string(), res.loss_history);

    if (res.loss_history.empty())
        std::printf("no training epochs run\n");
    else
        std::printf("final train loss: %s\n", fmt6(res.loss_history.back()).c_str());

    const fs::path val = fs::path(data) / "val";
    if (fs::exists(val / "manifest.jsonl")) {
        auto rep = fairkd::evaluate_model(res.params, fairkd::load_dataset(val.string()), kind);
        std::printf("val auc: %s\n", fmt6(rep.overall_auc).c_str());
        std::printf("val es_auc: %s\n", fmt6(rep.es_auc).c_str());
    }
    return 0;
}

void write_history_transfair(const std::string& path,
                             const std::vector<fairkd::TransfairEpochStats>& hist) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw fairkd::FormatError("cannot open " + path);
    for (std::size_t i = 0; i < hist.size(); ++i) {
        ordered_json j;
        j["epoch"] = i;
        j["l_cls"] = hist[i].l_cls;
        j["bce"] = hist[i].bce;
        j["d_kl_img"] = hist[i].d_kl_img;
        j["d_kl_attr"] = hist[i].d_kl_attr;
        f << j.dump() << "\n";
    }
}

int cmd_train_transfair(const fairkd::RunConfig& cfg, const std::string& data,
                        const std::string& teacher_dir, const std::string& out) {
    if (teacher_dir.empty())
        throw fairkd::ConfigError("distill.teacher_checkpoint: no teacher checkpoint given");
    fairkd::FairENParams teacher = fairkd::load_checkpoint(teacher_dir);
    auto train_recs = load_train_split(data);
    fairkd::TransfairResult res =
        fairkd::train_transfair(train_recs, teacher, cfg.train, cfg.distill);
    fs::create_directories(out);
    fairkd::save_checkpoint(res.student, (fs::path(out) / "student").string());
    fairkd::save_checkpoint(res.teacher, (fs::path(out) / "teacher").string());
    write_history_transfair((fs::path(out) / "history.jsonl").string(), res.history);

    if (res.history.empty()) {
        std::printf("no training epochs run\n");
    } else {
        const auto& last = res.history.back();
        std::printf("final l_cls: %s\n", fmt6(last.l_cls).c_str());
        std::printf("final bce: %s\n", fmt6(last.bce).c_str());
        std::printf("final d_kl_img: %s\n", fmt6(last.d_kl_img).c_str());
        std::printf("final d_kl_attr: %s\n", fmt6(last.d_kl_attr).c_str());
    }
    return 0;
}

int cmd_evaluate(const std::string& ckpt, const std::string& data, const std::string& attribute,
                 fairkd::LabelKind kind, const std::string& out_file) {
    fairkd::FairENParams params = fairkd::load_checkpoint(ckpt);
    auto recs = load_eval_split(data);
    check_attribute(attribute, recs);
    fairkd::EvalReport rep = fairkd::evaluate_model(params, recs, kind);
    const std::string s = fairkd::report_to_json(rep);
    std::fputs(s.c_str(), stdout);
    if (!out_file.empty()) {
        std::ofstream f(out_file, std::ios::binary);
        if (!f) throw fairkd::FormatError("cannot open " + out_file);
        f << s;
    }
    return 0;
}

int cmd_sweep(const fairkd::RunConfig& cfg, const std::string& data,
              const std::string& teacher_dir, const std::string& out,
              const std::vector<double>& alphas, const std::vector<double>& betas) {
    if (alphas.empty()) throw fairkd::ConfigError("alphas: empty grid");
    if (betas.empty()) throw fairkd::ConfigError("betas: empty grid");
    if (teacher_dir.empty())
        throw fairkd::ConfigError("distill.teacher_checkpoint: no teacher checkpoint given");
    fairkd::FairENParams teacher = fairkd::load_checkpoint(teacher_dir);
    auto train_recs = load_train_split(data);
    const fs::path test = fs::path(data) / "test";
    if (!fs::exists(test / "manifest.jsonl"))
        throw fairkd::FormatError("sweep needs a test split under " + data);
    auto test_recs = fairkd::load_dataset(test.string());

    std::string table = "{\n  \"cells\": {";
    bool first = true;
    for (double a : alphas) {
        for (double b : betas) {
            fairkd::DistillConfig dc = cfg.distill;
            dc.alpha = a;
            dc.beta = b;
            auto res = fairkd::train_transfair(train_recs, teacher, cfg.train, dc);
            auto rep = fairkd::evaluate_model(res.student, test_recs,
                                              fairkd::LabelKind::Progression);
            std::printf("cell alpha=%s beta=%s overall_auc=%s es_auc=%s\n", fmt6(a).c_str(),
                        fmt6(b).c_str(), fmt6(rep.overall_auc).c_str(), fmt6(rep.es_auc).c_str());
            if (!first) table += ",";
            first = false;
            table += "\n    \"" + fmt6(a) + "," + fmt6(b) + "\": {";
            table += "\"overall_auc\": " + fmt6(rep.overall_auc);
            table += ", \"es_auc\": " + fmt6(rep.es_auc);
            table += ", \"group_aucs\": {";
            for (std::size_t i = 0; i < rep.group_aucs.size(); ++i) {
                if (i) table += ", ";
                table += "\"" + rep.group_aucs[i].first + "\": ";
                table += rep.group_aucs[i].second ? fmt6(*rep.group_aucs[i].second)
                                                  : std::string("\"undefined\"");
            }
            table += "}}";
        }
    }
    table += "\n  }\n}\n";

    fs::create_directories(out);
    const std::string path = (fs::path(out) / "sweep.json").string();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw fairkd::FormatError("cannot open " + path);
    f << table;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fairkd: fairness-aware classification, distillation and evaluation"};
    app.require_subcommand(1);

    std::string config_path, data_dir, out_dir, teacher_dir, ckpt_dir, attribute, out_file;
    std::string label = "class";
    std::uint64_t seed = 0;
    std::size_t epochs = 0;
    double alpha = 0.0, beta = 0.0;
    std::vector<double> alphas, betas;
    bool no_attention = false;

    auto* gen = app.add_subcommand("gen-data", "Generate and split a synthetic cohort");
    gen->add_option("--config", config_path, "Run config file")->required();
    gen->add_option("--out", out_dir, "Output dataset directory")->required();
    auto* gen_seed = gen->add_option("--seed", seed, "Override cohort seed");

    auto* tcls = app.add_subcommand("train-cls", "Train a FairEN classifier");
    tcls->add_option("--config", config_path, "Run config file")->required();
    tcls->add_option("--data", data_dir, "Dataset directory")->required();
    tcls->add_option("--out", out_dir, "Run output directory")->required();
    auto* tcls_seed = tcls->add_option("--seed", seed, "Override training seed");
    auto* tcls_epochs = tcls->add_option("--epochs", epochs, "Override epoch count");
    tcls->add_option("--label", label, "Training label: class or prog")
        ->check(CLI::IsMember({"class", "prog"}));
    tcls->add_flag("--no-attention", no_attention, "Train the attention-disabled baseline");

    auto* ttf = app.add_subcommand("train-transfair", "Teacher-student distillation training");
    ttf->add_option("--config", config_path, "Run config file")->required();
    ttf->add_option("--data", data_dir, "Progression dataset directory")->required();
    ttf->add_option("--teacher", teacher_dir, "Teacher checkpoint directory");
    ttf->add_option("--out", out_dir, "Run output directory")->required();
    auto* ttf_seed = ttf->add_option("--seed", seed, "Override training seed");
    auto* ttf_epochs = ttf->add_option("--epochs", epochs, "Override epoch count");
    auto* ttf_alpha = ttf->add_option("--alpha", alpha, "Image-feature KL weight");
    auto* ttf_beta = ttf->add_option("--beta", beta, "Attribute-feature KL weight");
    ttf->add_flag("--no-attention", no_attention, "Student without attention");

    auto* ev = app.add_subcommand("evaluate", "Evaluate a checkpoint on a test split");
    ev->add_option("--checkpoint", ckpt_dir, "Checkpoint directory")->required();
    ev->add_option("--data", data_dir, "Dataset directory")->required();
    ev->add_option("--attribute", attribute, "Expected demographic attribute name");
    ev->add_option("--label", label, "Evaluation label: class or prog")
        ->check(CLI::IsMember({"class", "prog"}));
    ev->add_option("--out", out_file, "Also write the report to this file");

    auto* sw = app.add_subcommand("sweep", "Alpha/beta sensitivity grid");
    sw->add_option("--config", config_path, "Run config file")->required();
    sw->add_option("--data", data_dir, "Progression dataset directory")->required();
    sw->add_option("--teacher", teacher_dir, "Teacher checkpoint directory");
    sw->add_option("--out", out_dir, "Run output directory")->required();
    sw->add_option("--alphas", alphas, "Alpha grid values");
    sw->add_option("--betas", betas, "Beta grid values");
    auto* sw_seed = sw->add_option("--seed", seed, "Override training seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) {
            fairkd::RunConfig cfg = fairkd::load_run_config(config_path);
            if (*gen_seed) cfg.cohort.seed = seed;
            return cmd_gen_data(cfg, out_dir);
        }
        if (tcls->parsed()) {
            fairkd::RunConfig cfg = fairkd::load_run_config(config_path);
            if (*tcls_seed) cfg.train.seed = seed;
            if (*tcls_epochs) cfg.train.epochs = epochs;
            if (no_attention) cfg.train.attention_enabled = false;
            return cmd_train_cls(cfg, data_dir, out_dir, parse_label(label));
        }
        if (ttf->parsed()) {
            fairkd::RunConfig cfg = fairkd::load_run_config(config_path);
            if (*ttf_seed) cfg.train.seed = seed;
            if (*ttf_epochs) cfg.train.epochs = epochs;
            if (*ttf_alpha) cfg.distill.alpha = alpha;
            if (*ttf_beta) cfg.distill.beta = beta;
            if (no_attention) cfg.train.attention_enabled = false;
            if (teacher_dir.empty()) teacher_dir = cfg.distill.teacher_checkpoint;
            return cmd_train_transfair(cfg, data_dir, teacher_dir, out_dir);
        }
        if (ev->parsed())
            return cmd_evaluate(ckpt_dir, data_dir, attribute, parse_label(label), out_file);
        if (sw->parsed()) {
            fairkd::RunConfig cfg = fairkd::load_run_config(config_path);
            if (*sw_seed) cfg.train.seed = seed;
            if (teacher_dir.empty()) teacher_dir = cfg.distill.teacher_checkpoint;
            if (alphas.empty()) alphas = {cfg.distill.alpha};
            if (betas.empty()) betas = {cfg.distill.beta};
            return cmd_sweep(cfg, data_dir, teacher_dir, out_dir, alphas, betas);
        }
    } catch (const fairkd::TrainingError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const fairkd::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const fairkd::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const fairkd::DimensionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const fairkd::UndefinedAucError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const fairkd::ContractError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
