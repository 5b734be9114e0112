// SPDX-License-Identifier: Apache-2.0
#include "fairkd/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "fairkd/errors.hpp"
#include "fairkd/rng.hpp"

namespace fairkd {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

void validate_cohort_config(const CohortConfig& cfg) {
    if (cfg.n_samples == 0) throw ConfigError("n_samples: must be positive");
    const std::size_t g = cfg.group_proportions.size();
    if (g == 0) throw ConfigError("group_proportions: empty");
    double sum = 0.0;
    for (double p : cfg.group_proportions) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError("group_proportions: entries must be finite and non-negative");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("group_proportions: sum to " + std::to_string(sum) + ", expected 1");
    }
    if (cfg.noise_std.size() != g) throw ConfigError("noise_std: expected one entry per group");
    for (double s : cfg.noise_std)
        if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("noise_std: entries must be finite and >= 0");
    if (cfg.signal_gain.size() != g) throw ConfigError("signal_gain: expected one entry per group");
    for (double s : cfg.signal_gain)
        if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("signal_gain: entries must be finite and > 0");
    if (!cfg.group_names.empty() && cfg.group_names.size() != g)
        throw ConfigError("group_names: expected one name per group");
    if (cfg.image_h == 0 || cfg.image_w == 0) throw ConfigError("image_h: image size must be positive");
    if (!(cfg.progression_threshold > 0.0) || !(cfg.progression_threshold < 1.0))
        throw ConfigError("progression_threshold: must lie in (0,1)");
}

Tensor make_blob(std::size_t h, std::size_t w) {
    Tensor b = Tensor::zeros({1, h, w});
    const double cy = (static_cast<double>(h) - 1.0) / 2.0;
    const double cx = (static_cast<double>(w) - 1.0) / 2.0;
    const double s = static_cast<double>(h) / 4.0;
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const double dy = static_cast<double>(y) - cy;
            const double dx = static_cast<double>(x) - cx;
            b.data()[y * w + x] = std::exp(-(dy * dy + dx * dx) / (2.0 * s * s));
        }
    }
    return b;
}

std::vector<SampleRecord> generate_cohort(const CohortConfig& cfg) {
    validate_cohort_config(cfg);
    const std::size_t g = cfg.group_proportions.size();
    std::vector<std::string> names = cfg.group_names;
    if (names.empty())
        for (std::size_t i = 0; i < g; ++i) names.push_back("g" + std::to_string(i));

    std::vector<double> cum(g);
    double acc = 0.0;
    for (std::size_t i = 0; i < g; ++i) {
        acc += cfg.group_proportions[i];
        cum[i] = acc;
    }
    cum[g - 1] = 1.0;

    const Tensor blob = make_blob(cfg.image_h, cfg.image_w);
    const std::size_t hw = cfg.image_h * cfg.image_w;

    std::vector<SampleRecord> out(cfg.n_samples);
    for (std::size_t i = 0; i < cfg.n_samples; ++i) {
        Rng rng(mix_seed(cfg.seed, i));
        const double ug = rng.uniform();
        std::size_t gi = 0;
        while (gi + 1 < g && ug >= cum[gi]) ++gi;
        const double s = rng.uniform();
        const double pn = rng.normal(0.0, kProgNoiseStd);

        SampleRecord& r = out[i];
        char idbuf[16];
        std::snprintf(idbuf, sizeof(idbuf), "s%06zu", i);
        r.id = idbuf;
        r.group = GroupId{cfg.attribute_name, gi, names[gi]};
        r.latent_severity = s;
        r.class_label = s > 0.5 ? 1 : 0;
        r.prog_label = s + pn > cfg.progression_threshold ? 1 : 0;
        r.image = Tensor::zeros({1, cfg.image_h, cfg.image_w});
        const double gain = cfg.signal_gain[gi] * s;
        const double sigma = cfg.noise_std[gi];
        for (std::size_t px = 0; px < hw; ++px)
            r.image.data()[px] = gain * blob.data()[px] + rng.normal(0.0, sigma);
    }
    return out;
}

namespace {

// Largest-remainder apportionment of n into weights.
std::vector<std::size_t> apportion(std::size_t n, const std::vector<double>& weights) {
    const std::size_t k = weights.size();
    std::vector<std::size_t> counts(k);
    std::vector<std::pair<double, std::size_t>> rem(k);
    std::size_t used = 0;
    for (std::size_t j = 0; j < k; ++j) {
        const double q = static_cast<double>(n) * weights[j];
        counts[j] = static_cast<std::size_t>(std::floor(q));
        used += counts[j];
        rem[j] = {q - std::floor(q), j};
    }
    std::stable_sort(rem.begin(), rem.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t e = 0; e < n - used; ++e) counts[rem[e % k].second] += 1;
    return counts;
}

} // namespace

std::vector<std::vector<SampleRecord>> split_cohort(const std::vector<SampleRecord>& records,
                                                    const std::vector<double>& fractions,
                                                    std::uint64_t seed) {
    if (records.empty()) throw ContractError("split_cohort: empty record list");
    if (fractions.empty()) throw ContractError("split_cohort: no fractions given");
    double fsum = 0.0;
    for (double f : fractions) {
        if (!(f >= 0.0)) throw ConfigError("split_fractions: entries must be >= 0");
        fsum += f;
    }
    if (std::abs(fsum - 1.0) > 1e-9)
        throw ConfigError("split_fractions: sum to " + std::to_string(fsum) + ", expected 1");

    const std::size_t nsplits = fractions.size();
    const std::size_t n = records.size();
    const std::vector<std::size_t> target = apportion(n, fractions);

    // Strata keyed by (group index, class label, prog label), in key order.
    std::map<std::tuple<std::size_t, int, int>, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < n; ++i)
        strata[{records[i].group.value_index, records[i].class_label, records[i].prog_label}]
            .push_back(i);

    Rng rng(mix_seed(seed, kStreamSplit));
    std::vector<std::vector<std::size_t>> members; // shuffled index lists
    std::vector<std::vector<std::size_t>> alloc;   // per stratum, per split counts
    for (auto& [key, idxs] : strata) {
        rng.shuffle(idxs);
        members.push_back(idxs);
        alloc.push_back(apportion(idxs.size(), fractions));
    }

    const auto quota = [&](std::size_t s, std::size_t j) {
        return static_cast<double>(members[s].size()) * fractions[j];
    };
    const auto can_take = [&](std::size_t s, std::size_t j) {
        return static_cast<double>(alloc[s][j] + 1) <= std::ceil(quota(s, j)) + 1e-12;
    };
    const auto can_give = [&](std::size_t s, std::size_t j) {
        if (alloc[s][j] == 0) return false;
        // Keep at least one train member in any stratum of size >= 2.
        if (j == 0 && members[s].size() >= 2 && alloc[s][0] <= 1) return false;
        return static_cast<double>(alloc[s][j] - 1) >= std::floor(quota(s, j)) - 1e-12;
    };

    // Every stratum with >= 2 members must reach train.
    for (std::size_t s = 0; s < members.size(); ++s) {
        if (members[s].size() >= 2 && alloc[s][0] == 0) {
            std::size_t jmax = 1;
            for (std::size_t j = 2; j < nsplits; ++j)
                if (alloc[s][j] > alloc[s][jmax]) jmax = j;
            alloc[s][jmax] -= 1;
            alloc[s][0] += 1;
        }
    }

    // Repair global totals with moves that stay inside each stratum's
    // floor/ceil band, so per-stratum deviation never exceeds 1.
    std::vector<std::size_t> totals(nsplits, 0);
    for (const auto& a : alloc)
        for (std::size_t j = 0; j < nsplits; ++j) totals[j] += a[j];
    for (std::size_t guard = 0; guard < n; ++guard) {
        std::size_t jo = nsplits, ju = nsplits;
        for (std::size_t j = 0; j < nsplits; ++j) {
            if (totals[j] > target[j] && jo == nsplits) jo = j;
            if (totals[j] < target[j] && ju == nsplits) ju = j;
        }
        if (jo == nsplits) break;
        bool moved = false;
        for (std::size_t s = 0; s < members.size() && !moved; ++s) {
            if (can_give(s, jo) && can_take(s, ju)) {
                alloc[s][jo] -= 1;
                alloc[s][ju] += 1;
                totals[jo] -= 1;
                totals[ju] += 1;
                moved = true;
            }
        }
        if (!moved) {
            // No band-preserving move exists (degenerate tiny strata); relax
            // the ceiling on the receiving side.
            for (std::size_t s = 0; s < members.size() && !moved; ++s) {
                if (can_give(s, jo)) {
                    alloc[s][jo] -= 1;
                    alloc[s][ju] += 1;
                    totals[jo] -= 1;
                    totals[ju] += 1;
                    moved = true;
                }
            }
        }
        if (!moved) break;
    }

    std::vector<std::vector<std::size_t>> picked(nsplits);
    for (std::size_t s = 0; s < members.size(); ++s) {
        std::size_t pos = 0;
        for (std::size_t j = 0; j < nsplits; ++j)
            for (std::size_t c = 0; c < alloc[s][j]; ++c) picked[j].push_back(members[s][pos++]);
    }

    std::vector<std::vector<SampleRecord>> out(nsplits);
    for (std::size_t j = 0; j < nsplits; ++j) {
        std::sort(picked[j].begin(), picked[j].end());
        for (std::size_t i : picked[j]) out[j].push_back(records[i]);
    }
    return out;
}

namespace {

void write_le_doubles(std::ofstream& f, const std::vector<double>& v) {
    for (double d : v) {
        const std::uint64_t u = std::bit_cast<std::uint64_t>(d);
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xFF);
        f.write(reinterpret_cast<const char*>(b), 8);
    }
}

std::vector<double> read_le_doubles(std::ifstream& f, std::size_t count) {
    std::vector<double> v(count);
    std::vector<unsigned char> buf(count * 8);
    f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    for (std::size_t i = 0; i < count; ++i) {
        std::uint64_t u = 0;
        for (int b = 7; b >= 0; --b) u = (u << 8) | buf[i * 8 + static_cast<std::size_t>(b)];
        v[i] = std::bit_cast<double>(u);
    }
    return v;
}

const std::vector<std::string> kRecordKeys = {
    "id", "group_attribute", "group_index", "group_name", "class_label",
    "prog_label", "latent_severity", "byte_offset", "shape"};

} // namespace

void save_dataset(const std::vector<SampleRecord>& records, const std::string& dir) {
    fs::create_directories(dir);
    const std::string tensor_name = "tensors.bin";
    std::ofstream tf(fs::path(dir) / tensor_name, std::ios::binary);
    if (!tf) throw FormatError("save_dataset: cannot open " + dir + "/" + tensor_name);
    std::ofstream mf(fs::path(dir) / "manifest.jsonl", std::ios::binary);
    if (!mf) throw FormatError("save_dataset: cannot open " + dir + "/manifest.jsonl");

    ordered_json header;
    header["format_version"] = 1;
    header["tensor_file"] = tensor_name;
    mf << header.dump() << "\n";

    std::size_t offset = 0;
    for (const SampleRecord& r : records) {
        ordered_json j;
        j["id"] = r.id;
        j["group_attribute"] = r.group.attribute_name;
        j["group_index"] = r.group.value_index;
        j["group_name"] = r.group.value_name;
        j["class_label"] = r.class_label;
        j["prog_label"] = r.prog_label;
        j["latent_severity"] = r.latent_severity;
        j["byte_offset"] = offset;
        j["shape"] = r.image.shape();
        mf << j.dump() << "\n";
        write_le_doubles(tf, r.image.data());
        offset += r.image.numel() * 8;
    }
}

std::vector<SampleRecord> load_dataset(const std::string& dir) {
    std::ifstream mf(fs::path(dir) / "manifest.jsonl", std::ios::binary);
    if (!mf) throw FormatError("load_dataset: cannot open " + dir + "/manifest.jsonl");

    std::string line;
    if (!std::getline(mf, line)) throw FormatError("load_dataset: empty manifest in " + dir);
    ordered_json header;
    try {
        header = ordered_json::parse(line);
    } catch (const std::exception& e) {
        throw FormatError(std::string("load_dataset: bad manifest header: ") + e.what());
    }
    if (!header.contains("format_version") || header["format_version"] != 1) {
        throw FormatError("load_dataset: unsupported format_version in " + dir +
                          " (expected 1)");
    }
    if (!header.contains("tensor_file") || !header["tensor_file"].is_string())
        throw FormatError("load_dataset: manifest header missing tensor_file");
    const fs::path tpath = fs::path(dir) / header["tensor_file"].get<std::string>();
    std::ifstream tf(tpath, std::ios::binary);
    if (!tf) throw FormatError("load_dataset: cannot open " + tpath.string());
    tf.seekg(0, std::ios::end);
    const std::size_t tlen = static_cast<std::size_t>(tf.tellg());

    std::vector<SampleRecord> out;
    std::size_t prev_end = 0;
    while (std::getline(mf, line)) {
        if (line.empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const std::exception& e) {
            throw FormatError(std::string("load_dataset: bad record line: ") + e.what());
        }
        std::string id = j.contains("id") && j["id"].is_string() ? j["id"].get<std::string>()
                                                                 : std::string("<missing id>");
        for (const std::string& k : kRecordKeys)
            if (!j.contains(k))
                throw FormatError("load_dataset: record " + id + " missing key " + k);
        for (auto it = j.begin(); it != j.end(); ++it)
            if (std::find(kRecordKeys.begin(), kRecordKeys.end(), it.key()) == kRecordKeys.end())
                throw FormatError("load_dataset: record " + id + " has unknown key " + it.key());

        SampleRecord r;
        r.id = id;
        r.group.attribute_name = j["group_attribute"].get<std::string>();
        r.group.value_index = j["group_index"].get<std::size_t>();
        r.group.value_name = j["group_name"].get<std::string>();
        r.class_label = j["class_label"].get<int>();
        r.prog_label = j["prog_label"].get<int>();
        r.latent_severity = j["latent_severity"].get<double>();
        if ((r.class_label != 0 && r.class_label != 1) || (r.prog_label != 0 && r.prog_label != 1))
            throw FormatError("load_dataset: record " + id + " has non-binary label");

        Shape shape = j["shape"].get<Shape>();
        const std::size_t offset = j["byte_offset"].get<std::size_t>();
        const std::size_t nbytes = shape_numel(shape) * 8;
        if (offset < prev_end)
            throw FormatError("load_dataset: record " + id + " overlaps the previous record");
        if (offset + nbytes > tlen)
            throw FormatError("load_dataset: record " + id + " extends past the tensor file");
        prev_end = offset + nbytes;

        tf.seekg(static_cast<std::streamoff>(offset));
        r.image = Tensor::from_data(shape, read_le_doubles(tf, shape_numel(shape)));
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace fairkd
