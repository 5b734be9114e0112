// SPDX-License-Identifier: Apache-2.0
#include "fairkd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "fairkd/errors.hpp"
#include "fairkd/graph.hpp"

namespace fairkd {

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw ContractError("roc_auc: " + std::to_string(scores.size()) + " scores vs " +
                            std::to_string(labels.size()) + " labels");
    if (scores.empty()) throw ContractError("roc_auc: empty input");
    std::size_t npos = 0;
    for (int y : labels) {
        if (y != 0 && y != 1) throw ContractError("roc_auc: labels must be 0/1");
        npos += static_cast<std::size_t>(y);
    }
    const std::size_t nneg = labels.size() - npos;
    if (npos == 0 || nneg == 0)
        throw UndefinedAucError("roc_auc: needs both classes, got " + std::to_string(npos) +
                                " positives and " + std::to_string(nneg) + " negatives");

    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Doubled midranks keep everything in integers, so ties are exact.
    std::uint64_t pos_rank2 = 0;
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
        const std::uint64_t rank2 = static_cast<std::uint64_t>(i + j + 1); // 2 * midrank
        for (std::size_t t = i; t < j; ++t)
            if (labels[idx[t]] == 1) pos_rank2 += rank2;
        i = j;
    }
    const std::uint64_t num = pos_rank2 - static_cast<std::uint64_t>(npos) * (npos + 1);
    return static_cast<double>(num) / (2.0 * static_cast<double>(npos) * static_cast<double>(nneg));
}

std::map<std::string, std::optional<double>> group_auc(const std::vector<double>& scores,
                                                       const std::vector<int>& labels,
                                                       const std::vector<std::string>& groups) {
    if (scores.size() != labels.size() || scores.size() != groups.size())
        throw ContractError("group_auc: scores, labels and groups must align");
    std::map<std::string, std::pair<std::vector<double>, std::vector<int>>> by_group;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        auto& slot = by_group[groups[i]];
        slot.first.push_back(scores[i]);
        slot.second.push_back(labels[i]);
    }
    std::map<std::string, std::optional<double>> out;
    for (const auto& [name, sl] : by_group) {
        try {
            out[name] = roc_auc(sl.first, sl.second);
        } catch (const UndefinedAucError&) {
            out[name] = std::nullopt;
        }
    }
    return out;
}

double es_auc(double overall, const std::vector<double>& group_aucs) {
    if (!(overall >= 0.0 && overall <= 1.0))
        throw ContractError("es_auc: overall AUC " + std::to_string(overall) +
                            " outside [0,1]");
    double disparity = 0.0;
    for (double a : group_aucs) {
        if (!(a >= 0.0 && a <= 1.0))
            throw ContractError("es_auc: group AUC " + std::to_string(a) + " outside [0,1]");
        disparity += std::abs(overall - a);
    }
    return overall / (1.0 + disparity);
}

namespace {

std::string fmt6(double x) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6f", x);
    return buf;
}

std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

} // namespace

std::string report_to_json(const EvalReport& r) {
    std::string s = "{\n";
    s += "  \"attribute_name\": \"" + json_escape(r.attribute_name) + "\",\n";
    s += "  \"overall_auc\": " + fmt6(r.overall_auc) + ",\n";
    s += "  \"group_aucs\": {";
    for (std::size_t i = 0; i < r.group_aucs.size(); ++i) {
        if (i) s += ",";
        s += "\n    \"" + json_escape(r.group_aucs[i].first) + "\": ";
        s += r.group_aucs[i].second ? fmt6(*r.group_aucs[i].second) : "\"undefined\"";
    }
    s += r.group_aucs.empty() ? "},\n" : "\n  },\n";
    s += "  \"es_auc\": " + fmt6(r.es_auc) + ",\n";
    s += "  \"n\": {";
    for (std::size_t i = 0; i < r.n_per_group.size(); ++i) {
        if (i) s += ",";
        s += "\n    \"" + json_escape(r.n_per_group[i].first) + "\": " +
             std::to_string(r.n_per_group[i].second);
    }
    s += r.n_per_group.empty() ? "}" : "\n  }";
    if (r.no_defined_groups) {
        s += ",\n  \"warning\": \"no group has both classes; es_auc equals overall_auc\"";
    }
    s += "\n}\n";
    return s;
}

EvalReport evaluate_model(const FairENParams& params, const std::vector<SampleRecord>& records,
                          LabelKind kind) {
    if (records.empty()) throw ContractError("evaluate_model: empty dataset");
    std::vector<double> scores;
    std::vector<int> labels;
    std::vector<std::string> groups;
    scores.reserve(records.size());
    for (const SampleRecord& r : records) {
        if (r.group.value_index >= params.group_count) {
            throw DimensionError("evaluate_model: record " + r.id + " has group index " +
                                 std::to_string(r.group.value_index) +
                                 " but the checkpoint was trained with " +
                                 std::to_string(params.group_count) + " groups");
        }
        Graph g;
        Tensor oh = one_hot_row(r.group.value_index, params.group_count);
        scores.push_back(g.sigmoid(fairen_forward(g, params, r.image, oh).logit).value());
        labels.push_back(label_of(r, kind));
        groups.push_back(r.group.value_name);
    }

    EvalReport rep;
    rep.attribute_name = records[0].group.attribute_name;
    rep.overall_auc = roc_auc(scores, labels);

    auto per_group = group_auc(scores, labels, groups);
    std::vector<std::string> order; // first-appearance order
    std::map<std::string, std::size_t> counts;
    for (const std::string& gname : groups) {
        if (!counts.count(gname)) order.push_back(gname);
        counts[gname] += 1;
    }
    std::vector<double> defined;
    for (const std::string& gname : order) {
        rep.group_aucs.emplace_back(gname, per_group[gname]);
        rep.n_per_group.emplace_back(gname, counts[gname]);
        if (per_group[gname]) defined.push_back(*per_group[gname]);
    }
    rep.no_defined_groups = defined.empty();
    rep.es_auc = es_auc(rep.overall_auc, defined);
    return rep;
}

} // namespace fairkd
