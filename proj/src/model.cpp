// SPDX-License-Identifier: Apache-2.0
#include "fairkd/model.hpp"

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "fairkd/errors.hpp"
#include "fairkd/optim.hpp"
#include "fairkd/rng.hpp"

namespace fairkd {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::vector<Tensor> FairENParams::parameters() const {
    std::vector<Tensor> out;
    if (const auto* c = std::get_if<ConvBackboneParams>(&backbone.layers)) {
        out.insert(out.end(), {c->k1, c->b1, c->k2, c->b2, c->w, c->b});
    } else {
        const auto& m = std::get<MlpBackboneParams>(backbone.layers);
        out.insert(out.end(), {m.w1, m.b1, m.w2, m.b2});
    }
    out.insert(out.end(), {attr_encoder.w1, attr_encoder.b1, attr_encoder.w2, attr_encoder.b2});
    out.insert(out.end(), {attention.wq, attention.wk, attention.wv});
    out.insert(out.end(), {head_w, head_b});
    return out;
}

std::vector<Tensor> FairENParams::trainable_parameters() const {
    if (attention_enabled) return parameters();
    std::vector<Tensor> out;
    if (const auto* c = std::get_if<ConvBackboneParams>(&backbone.layers)) {
        out.insert(out.end(), {c->k1, c->b1, c->k2, c->b2, c->w, c->b});
    } else {
        const auto& m = std::get<MlpBackboneParams>(backbone.layers);
        out.insert(out.end(), {m.w1, m.b1, m.w2, m.b2});
    }
    out.insert(out.end(), {head_w, head_b});
    return out;
}

FairENParams FairENParams::clone() const {
    FairENParams out = *this;
    if (const auto* c = std::get_if<ConvBackboneParams>(&backbone.layers)) {
        out.backbone.layers = ConvBackboneParams{c->k1.clone(), c->b1.clone(), c->k2.clone(),
                                                 c->b2.clone(), c->w.clone(), c->b.clone()};
    } else {
        const auto& m = std::get<MlpBackboneParams>(backbone.layers);
        out.backbone.layers =
            MlpBackboneParams{m.w1.clone(), m.b1.clone(), m.w2.clone(), m.b2.clone()};
    }
    out.attr_encoder = {attr_encoder.w1.clone(), attr_encoder.b1.clone(),
                        attr_encoder.w2.clone(), attr_encoder.b2.clone()};
    out.attention = {attention.wq.clone(), attention.wk.clone(), attention.wv.clone()};
    out.head_w = head_w.clone();
    out.head_b = head_b.clone();
    return out;
}

namespace {

// Fan-based uniform bound for a weight tensor; biases are zero-initialized.
double fan_bound(const Shape& s) {
    double fan_in = 0.0, fan_out = 0.0;
    if (s.size() == 2) {
        fan_in = static_cast<double>(s[0]);
        fan_out = static_cast<double>(s[1]);
    } else { // conv kernel [cout,cin,kh,kw]
        const double rf = static_cast<double>(s[2] * s[3]);
        fan_in = static_cast<double>(s[1]) * rf;
        fan_out = static_cast<double>(s[0]) * rf;
    }
    return std::sqrt(6.0 / (fan_in + fan_out));
}

void fill_uniform(Tensor& t, Rng& rng) {
    const double b = fan_bound(t.shape());
    for (double& x : t.data()) x = rng.uniform(-b, b);
}

} // namespace

FairENParams init_fairen(const TrainConfig& cfg, std::size_t group_count,
                         std::size_t image_h, std::size_t image_w) {
    if (cfg.d == 0) throw ConfigError("d: must be positive");
    if (group_count == 0) throw ConfigError("group_count: must be positive");
    if (cfg.backbone != "conv" && cfg.backbone != "mlp")
        throw ConfigError("backbone: expected \"conv\" or \"mlp\", got \"" + cfg.backbone + "\"");
    if (cfg.backbone == "conv" && (image_h < 5 || image_w < 5))
        throw ConfigError("image_h: conv backbone needs images of at least 5x5");

    FairENParams p;
    p.attention_enabled = cfg.attention_enabled;
    p.group_count = group_count;
    p.backbone.feature_dim = cfg.d;
    p.backbone.image_h = image_h;
    p.backbone.image_w = image_w;
    const std::size_t d = cfg.d;
    if (cfg.backbone == "conv") {
        ConvBackboneParams c;
        c.k1 = Tensor::zeros({kConvChannels, 1, 3, 3}, true);
        c.b1 = Tensor::zeros({kConvChannels}, true);
        c.k2 = Tensor::zeros({kConvChannels, kConvChannels, 3, 3}, true);
        c.b2 = Tensor::zeros({kConvChannels}, true);
        c.w = Tensor::zeros({kConvChannels, d}, true);
        c.b = Tensor::zeros({1, d}, true);
        p.backbone.layers = std::move(c);
    } else {
        MlpBackboneParams m;
        m.w1 = Tensor::zeros({image_h * image_w, kMlpHidden}, true);
        m.b1 = Tensor::zeros({1, kMlpHidden}, true);
        m.w2 = Tensor::zeros({kMlpHidden, d}, true);
        m.b2 = Tensor::zeros({1, d}, true);
        p.backbone.layers = std::move(m);
    }
    p.attr_encoder.w1 = Tensor::zeros({group_count, d}, true);
    p.attr_encoder.b1 = Tensor::zeros({1, d}, true);
    p.attr_encoder.w2 = Tensor::zeros({d, d}, true);
    p.attr_encoder.b2 = Tensor::zeros({1, d}, true);
    p.attention.wq = Tensor::zeros({d, d}, true);
    p.attention.wk = Tensor::zeros({d, d}, true);
    p.attention.wv = Tensor::zeros({d, d}, true);
    p.head_w = Tensor::zeros({d, 1}, true);
    p.head_b = Tensor::zeros({1, 1}, true);

    // Biases stay zero; weights and kernels draw in declared order.
    std::vector<Tensor> weights;
    if (const auto* c = std::get_if<ConvBackboneParams>(&p.backbone.layers)) {
        weights.insert(weights.end(), {c->k1, c->k2, c->w});
    } else {
        const auto& m = std::get<MlpBackboneParams>(p.backbone.layers);
        weights.insert(weights.end(), {m.w1, m.w2});
    }
    weights.insert(weights.end(), {p.attr_encoder.w1, p.attr_encoder.w2, p.attention.wq,
                                   p.attention.wk, p.attention.wv, p.head_w});
    Rng rng(mix_seed(cfg.seed, kStreamInit));
    for (Tensor t : weights) fill_uniform(t, rng);
    return p;
}

ForwardOut fairen_forward(Graph& g, const FairENParams& p, const Tensor& image,
                          const Tensor& group_one_hot) {
    Tensor h = backbone_encode(g, p.backbone, image);
    Tensor h_attr = attribute_encode(g, p.attr_encoder, group_one_hot);
    if (p.attention_enabled) h = fair_attention(g, p.attention, h, h_attr).h_out;
    Tensor logit = g.add(g.matmul(h, p.head_w), p.head_b);
    return {logit, h, h_attr};
}

Tensor bce_loss(Graph& g, const Tensor& logits, const Tensor& labels) {
    if (logits.numel() != labels.numel()) {
        throw ContractError("bce_loss: " + std::to_string(logits.numel()) + " logits vs " +
                            std::to_string(labels.numel()) + " labels");
    }
    if (labels.numel() == 0) throw ContractError("bce_loss: empty batch");
    Tensor ny = Tensor::zeros(labels.shape());
    for (std::size_t i = 0; i < labels.numel(); ++i) {
        const double y = labels.data()[i];
        if (y != 0.0 && y != 1.0)
            throw ContractError("bce_loss: label " + std::to_string(y) + " is not binary");
        ny.data()[i] = 1.0 - y;
    }
    Tensor prob = g.sigmoid(logits);
    Tensor pos = g.mul(labels, g.log(prob));
    Tensor neg = g.mul(ny, g.log(g.add_const(g.mul_const(prob, -1.0), 1.0)));
    return g.mul_const(g.mean(g.add(pos, neg)), -1.0);
}

int label_of(const SampleRecord& r, LabelKind kind) {
    return kind == LabelKind::Class ? r.class_label : r.prog_label;
}

TrainResult train_fairen(const std::vector<SampleRecord>& records, const TrainConfig& cfg,
                         LabelKind kind) {
    if (records.empty()) throw ContractError("train_fairen: empty dataset");
    if (cfg.batch == 0) throw ConfigError("batch: must be positive");
    if (cfg.batch > records.size())
        throw ConfigError("batch: " + std::to_string(cfg.batch) + " exceeds dataset size " +
                          std::to_string(records.size()));
    std::size_t groups = 0;
    for (const SampleRecord& r : records) groups = std::max(groups, r.group.value_index + 1);
    const Shape& ishape = records[0].image.shape();

    FairENParams params = init_fairen(cfg, groups, ishape[1], ishape[2]);
    AdamWConfig ocfg;
    ocfg.lr = cfg.lr;
    AdamW opt(params.trainable_parameters(), ocfg);

    const std::size_t n = records.size();
    std::vector<double> history;
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng perm(mix_seed(cfg.seed, kStreamEpoch + epoch));
        perm.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0, b = 0; start < n; start += cfg.batch, ++b) {
            const std::size_t k = std::min(cfg.batch, n - start);
            opt.zero_grad();
            Graph g;
            std::vector<Tensor> logit_rows;
            Tensor labels = Tensor::zeros({k, 1});
            for (std::size_t j = 0; j < k; ++j) {
                const SampleRecord& r = records[order[start + j]];
                Tensor oh = one_hot_row(r.group.value_index, groups);
                logit_rows.push_back(fairen_forward(g, params, r.image, oh).logit);
                labels.data()[j] = static_cast<double>(label_of(r, kind));
            }
            Tensor loss = bce_loss(g, g.stack_rows(logit_rows), labels);
            if (!std::isfinite(loss.value())) {
                throw TrainingError("train_fairen: non-finite loss at epoch " +
                                    std::to_string(epoch) + ", batch " + std::to_string(b));
            }
            g.backward(loss);
            opt.step();
            epoch_loss += loss.value() * static_cast<double>(k);
        }
        history.push_back(epoch_loss / static_cast<double>(n));
    }
    return {std::move(params), std::move(history)};
}

namespace {

void write_le(std::ofstream& f, const std::vector<double>& v) {
    for (double d : v) {
        const std::uint64_t u = std::bit_cast<std::uint64_t>(d);
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xFF);
        f.write(reinterpret_cast<const char*>(b), 8);
    }
}

} // namespace

void save_checkpoint(const FairENParams& params, const std::string& dir) {
    fs::create_directories(dir);
    ordered_json j;
    j["format_version"] = 1;
    j["variant"] = params.backbone.variant();
    j["d"] = params.backbone.feature_dim;
    j["attention_enabled"] = params.attention_enabled;
    j["group_count"] = params.group_count;
    j["image_h"] = params.backbone.image_h;
    j["image_w"] = params.backbone.image_w;
    ordered_json shapes = ordered_json::array();
    for (const Tensor& t : params.parameters()) shapes.push_back(t.shape());
    j["shapes"] = shapes;

    std::ofstream mf(fs::path(dir) / "model.json", std::ios::binary);
    if (!mf) throw FormatError("save_checkpoint: cannot open " + dir + "/model.json");
    mf << j.dump(2) << "\n";

    std::ofstream pf(fs::path(dir) / "params.bin", std::ios::binary);
    if (!pf) throw FormatError("save_checkpoint: cannot open " + dir + "/params.bin");
    for (const Tensor& t : params.parameters()) write_le(pf, t.data());
}

FairENParams load_checkpoint(const std::string& dir) {
    std::ifstream mf(fs::path(dir) / "model.json", std::ios::binary);
    if (!mf) throw FormatError("load_checkpoint: cannot open " + dir + "/model.json");
    ordered_json j;
    try {
        mf >> j;
    } catch (const std::exception& e) {
        throw FormatError("load_checkpoint: bad model.json: " + std::string(e.what()));
    }
    for (const char* key : {"format_version", "variant", "d", "attention_enabled", "group_count",
                            "image_h", "image_w", "shapes"}) {
        if (!j.contains(key))
            throw FormatError("load_checkpoint: model.json missing field " + std::string(key));
    }
    if (j["format_version"] != 1)
        throw FormatError("load_checkpoint: unsupported format_version in " + dir);

    TrainConfig cfg;
    cfg.d = j["d"].get<std::size_t>();
    cfg.backbone = j["variant"].get<std::string>();
    cfg.attention_enabled = j["attention_enabled"].get<bool>();
    FairENParams params = init_fairen(cfg, j["group_count"].get<std::size_t>(),
                                      j["image_h"].get<std::size_t>(),
                                      j["image_w"].get<std::size_t>());

    const std::vector<Tensor> ps = params.parameters();
    const auto shapes = j["shapes"];
    if (shapes.size() != ps.size())
        throw FormatError("load_checkpoint: shapes lists " + std::to_string(shapes.size()) +
                          " tensors, model has " + std::to_string(ps.size()));
    std::size_t total = 0;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        if (shapes[i].get<Shape>() != ps[i].shape())
            throw FormatError("load_checkpoint: shape mismatch at parameter " +
                              std::to_string(i));
        total += ps[i].numel();
    }

    std::ifstream pf(fs::path(dir) / "params.bin", std::ios::binary);
    if (!pf) throw FormatError("load_checkpoint: cannot open " + dir + "/params.bin");
    pf.seekg(0, std::ios::end);
    if (static_cast<std::size_t>(pf.tellg()) != total * 8)
        throw FormatError("load_checkpoint: params.bin holds " + std::to_string(pf.tellg()) +
                          " bytes, expected " + std::to_string(total * 8));
    pf.seekg(0);
    std::vector<unsigned char> buf(total * 8);
    pf.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    std::size_t pos = 0;
    for (Tensor t : ps) {
        for (std::size_t i = 0; i < t.numel(); ++i) {
            std::uint64_t u = 0;
            for (int b = 7; b >= 0; --b) u = (u << 8) | buf[pos + static_cast<std::size_t>(b)];
            t.data()[i] = std::bit_cast<double>(u);
            pos += 8;
        }
    }
    return params;
}

} // namespace fairkd
