// SPDX-License-Identifier: Apache-2.0
#include "fairkd/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fairkd/errors.hpp"

namespace fairkd {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    if (!out.empty() && out.back().empty()) out.pop_back();
    return out;
}

double parse_double(const std::string& path, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return d;
    } catch (const std::exception&) {
        throw ConfigError(path + ": cannot parse \"" + v + "\" as a number");
    }
}

std::vector<double> parse_doubles(const std::string& path, const std::string& v) {
    std::vector<double> out;
    for (const std::string& item : split_list(v)) out.push_back(parse_double(path, item));
    return out;
}

std::uint64_t parse_u64(const std::string& path, const std::string& v) {
    try {
        // stoull accepts a leading '-' and wraps; reject it explicitly.
        if (v.find('-') != std::string::npos) throw std::invalid_argument("negative");
        std::size_t pos = 0;
        const unsigned long long u = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return u;
    } catch (const std::exception&) {
        throw ConfigError(path + ": cannot parse \"" + v + "\" as a non-negative integer");
    }
}

bool parse_bool(const std::string& path, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError(path + ": cannot parse \"" + v + "\" as a boolean");
}

} // namespace

RunConfig parse_run_config(const std::string& text) {
    RunConfig cfg;
    // Defaults that make a minimal config usable out of the box.
    cfg.cohort.group_proportions = {0.5, 0.5};
    cfg.cohort.noise_std = {0.25, 0.25};
    cfg.cohort.signal_gain = {1.0, 1.0};

    std::istringstream in(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "cohort" && section != "train" && section != "distill" &&
                section != "eval")
                throw ConfigError("[" + section + "]: unknown section");
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        if (section.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        const std::string path = section + "." + key;

        if (section == "cohort") {
            if (key == "n_samples")
                cfg.cohort.n_samples = parse_u64(path, val);
            else if (key == "attribute_name")
                cfg.cohort.attribute_name = val;
            else if (key == "group_names")
                cfg.cohort.group_names = split_list(val);
            else if (key == "group_proportions")
                cfg.cohort.group_proportions = parse_doubles(path, val);
            else if (key == "noise_std")
                cfg.cohort.noise_std = parse_doubles(path, val);
            else if (key == "signal_gain")
                cfg.cohort.signal_gain = parse_doubles(path, val);
            else if (key == "progression_threshold")
                cfg.cohort.progression_threshold = parse_double(path, val);
            else if (key == "image_h")
                cfg.cohort.image_h = parse_u64(path, val);
            else if (key == "image_w")
                cfg.cohort.image_w = parse_u64(path, val);
            else if (key == "seed")
                cfg.cohort.seed = parse_u64(path, val);
            else if (key == "split_fractions")
                cfg.split_fractions = parse_doubles(path, val);
            else
                throw ConfigError(path + ": unknown key");
        } else if (section == "train") {
            if (key == "d")
                cfg.train.d = parse_u64(path, val);
            else if (key == "lr")
                cfg.train.lr = parse_double(path, val);
            else if (key == "epochs")
                cfg.train.epochs = parse_u64(path, val);
            else if (key == "batch")
                cfg.train.batch = parse_u64(path, val);
            else if (key == "alpha")
                cfg.train.alpha = parse_double(path, val);
            else if (key == "beta")
                cfg.train.beta = parse_double(path, val);
            else if (key == "seed")
                cfg.train.seed = parse_u64(path, val);
            else if (key == "backbone")
                cfg.train.backbone = val;
            else if (key == "attention")
                cfg.train.attention_enabled = parse_bool(path, val);
            else
                throw ConfigError(path + ": unknown key");
        } else if (section == "distill") {
            if (key == "alpha")
                cfg.distill.alpha = parse_double(path, val);
            else if (key == "beta")
                cfg.distill.beta = parse_double(path, val);
            else if (key == "teacher_checkpoint")
                cfg.distill.teacher_checkpoint = val;
            else if (key == "freeze_teacher_features")
                cfg.distill.freeze_teacher_features = parse_bool(path, val);
            else
                throw ConfigError(path + ": unknown key");
        } else { // eval
            if (key == "attribute")
                cfg.eval_attribute = val;
            else if (key == "label")
                cfg.eval_label = val;
            else
                throw ConfigError(path + ": unknown key");
        }
    }

    validate_cohort_config(cfg.cohort);
    if (cfg.split_fractions.empty()) throw ConfigError("cohort.split_fractions: empty");
    if (cfg.split_fractions.size() > 3)
        throw ConfigError("cohort.split_fractions: at most 3 splits (train/val/test)");
    double fsum = 0.0;
    for (double f : cfg.split_fractions) {
        if (!(f >= 0.0)) throw ConfigError("cohort.split_fractions: entries must be >= 0");
        fsum += f;
    }
    if (std::abs(fsum - 1.0) > 1e-9)
        throw ConfigError("cohort.split_fractions: sum to " + std::to_string(fsum) +
                          ", expected 1");
    if (cfg.train.d == 0) throw ConfigError("train.d: must be positive");
    if (!(cfg.train.lr > 0.0) || !std::isfinite(cfg.train.lr))
        throw ConfigError("train.lr: must be finite and > 0");
    if (cfg.train.batch == 0) throw ConfigError("train.batch: must be positive");
    if (cfg.train.backbone != "conv" && cfg.train.backbone != "mlp")
        throw ConfigError("train.backbone: expected \"conv\" or \"mlp\"");
    if (!(cfg.train.alpha >= 0.0) || !std::isfinite(cfg.train.alpha))
        throw ConfigError("train.alpha: must be finite and >= 0");
    if (!(cfg.train.beta >= 0.0) || !std::isfinite(cfg.train.beta))
        throw ConfigError("train.beta: must be finite and >= 0");
    if (!(cfg.distill.alpha >= 0.0) || !std::isfinite(cfg.distill.alpha))
        throw ConfigError("distill.alpha: must be finite and >= 0");
    if (!(cfg.distill.beta >= 0.0) || !std::isfinite(cfg.distill.beta))
        throw ConfigError("distill.beta: must be finite and >= 0");
    if (cfg.eval_label != "class" && cfg.eval_label != "prog")
        throw ConfigError("eval.label: expected \"class\" or \"prog\"");
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open config file " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_run_config(ss.str());
}

} // namespace fairkd
