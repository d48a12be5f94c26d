#include "stgcn/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>

#include "stgcn/keyvalue.hpp"
#include "stgcn/rng.hpp"

namespace stgcn {

std::string model_config_to_text(const ModelConfig& c) {
    std::string s;
    s += "template = " + c.template_name + "\n";
    s += "num_classes = " + std::to_string(c.num_classes) + "\n";
    s += "gvfe_out_channels = " + std::to_string(c.gvfe_out_channels) + "\n";
    s += "gvfe_temporal_window = " + std::to_string(c.gvfe_temporal_window) + "\n";
    std::vector<std::uint64_t> blocks(c.blocks.begin(), c.blocks.end());
    s += "blocks = " + join_uint_list(blocks) + "\n";
    s += "dhtcn_layers = " + std::to_string(c.dhtcn_layers) + "\n";
    s += "dhtcn_temporal_window = " + std::to_string(c.dhtcn_temporal_window) + "\n";
    s += "gvfe_relu = " + format_bool(c.gvfe_relu) + "\n";
    s += "gvfe_bn = " + format_bool(c.gvfe_bn) + "\n";
    s += "bias = " + format_bool(c.bias) + "\n";
    s += "seed = " + std::to_string(c.seed) + "\n";
    return s;
}

ModelConfig model_config_from_text(const std::string& text) {
    ModelConfig c;
    for (const KeyValue& kv : parse_key_values(text)) {
        if (kv.key == "template") {
            c.template_name = kv.value;
        } else if (kv.key == "num_classes") {
            c.num_classes = parse_uint(kv.value);
        } else if (kv.key == "gvfe_out_channels") {
            c.gvfe_out_channels = parse_uint(kv.value);
        } else if (kv.key == "gvfe_temporal_window") {
            c.gvfe_temporal_window = parse_uint(kv.value);
        } else if (kv.key == "blocks") {
            auto list = parse_uint_list(kv.value);
            c.blocks.assign(list.begin(), list.end());
        } else if (kv.key == "dhtcn_layers") {
            c.dhtcn_layers = parse_uint(kv.value);
        } else if (kv.key == "dhtcn_temporal_window") {
            c.dhtcn_temporal_window = parse_uint(kv.value);
        } else if (kv.key == "gvfe_relu") {
            c.gvfe_relu = parse_bool(kv.value);
        } else if (kv.key == "gvfe_bn") {
            c.gvfe_bn = parse_bool(kv.value);
        } else if (kv.key == "bias") {
            c.bias = parse_bool(kv.value);
        } else if (kv.key == "seed") {
            c.seed = parse_uint(kv.value);
        } else {
            throw std::invalid_argument("unknown model config key '" + kv.key + "'");
        }
    }
    return c;
}

namespace {

Tensor uniform_tensor(std::vector<std::size_t> shape, double bound, Rng& rng) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
    return t;
}

}  // namespace

Model build_model(const ModelConfig& config) {
    if (config.num_classes < 2) {
        throw std::invalid_argument("build_model: need at least 2 classes");
    }
    if (config.blocks.empty()) {
        throw std::invalid_argument("build_model: block list must be non-empty");
    }
    Model m;
    m.config = config;
    m.graph = SkeletonGraph::from_template(config.template_name);  // throws on unknown names
    const std::size_t joints = m.graph.joint_count();

    GvfeConfig gc;
    gc.out_channels = config.gvfe_out_channels;
    gc.temporal_window = config.gvfe_temporal_window;
    gc.bias = config.bias;
    m.gvfe = gvfe_init(m.store, joints, gc, config.seed);
    if (config.gvfe_bn) {
        m.gvfe_bn_gamma = m.store.add("gvfe.bn.gamma", Tensor::ones({config.gvfe_out_channels}));
        m.gvfe_bn_beta = m.store.add("gvfe.bn.beta", Tensor({config.gvfe_out_channels}));
        m.gvfe_bn_stats = make_running_stats(config.gvfe_out_channels);
    }

    std::size_t prev = config.gvfe_out_channels;
    for (std::size_t k = 0; k < config.blocks.size(); ++k) {
        BlockParams block;
        block.in_channels = prev;
        block.out_channels = config.blocks[k];
        std::string base = "block" + std::to_string(k);
        Rng rng(derive_seed(config.seed, 1000 + k));
        block.sgcn_weight = m.store.add(
            base + ".sgcn.weight",
            uniform_tensor({prev, block.out_channels}, std::sqrt(1.0 / static_cast<double>(prev)), rng));
        if (prev != block.out_channels) {
            block.has_projection = true;
            block.projection = m.store.add(
                base + ".residual.proj",
                uniform_tensor({prev, block.out_channels}, std::sqrt(1.0 / static_cast<double>(prev)),
                               rng));
        }
        DhtcnConfig dc;
        dc.channels = block.out_channels;
        dc.layers = config.dhtcn_layers;
        dc.temporal_window = config.dhtcn_temporal_window;
        dc.bias = config.bias;
        block.dhtcn = dhtcn_init(m.store, base + ".dhtcn", dc, derive_seed(config.seed, 2000 + k));
        m.blocks.push_back(std::move(block));
        prev = config.blocks[k];
    }

    Rng rng(derive_seed(config.seed, 3000));
    m.classifier_weight = m.store.add(
        "classifier.weight",
        uniform_tensor({prev, config.num_classes}, std::sqrt(1.0 / static_cast<double>(prev)), rng));
    m.classifier_bias = m.store.add("classifier.bias", Tensor({config.num_classes}));
    return m;
}

namespace {

// 1x1 channel projection: y(b, co, j, t) = sum_ci x(b, ci, j, t) * p(ci, co).
Tensor projection_forward(const Tensor& x, const Tensor& p) {
    const std::size_t b_n = x.extent(0), c_in = x.extent(1), plane = x.extent(2) * x.extent(3);
    const std::size_t c_out = p.extent(1);
    Tensor y({b_n, c_out, x.extent(2), x.extent(3)});
    for (std::size_t b = 0; b < b_n; ++b) {
        for (std::size_t co = 0; co < c_out; ++co) {
            double* yp = y.data() + (b * c_out + co) * plane;
            for (std::size_t ci = 0; ci < c_in; ++ci) {
                double coeff = p.at(ci, co);
                const double* xp = x.data() + (b * c_in + ci) * plane;
                for (std::size_t i = 0; i < plane; ++i) yp[i] += coeff * xp[i];
            }
        }
    }
    return y;
}

// Accumulates into grad_p; returns grad wrt x.
Tensor projection_backward(const Tensor& x, const Tensor& p, const Tensor& gy, Tensor& grad_p) {
    const std::size_t b_n = x.extent(0), c_in = x.extent(1), plane = x.extent(2) * x.extent(3);
    const std::size_t c_out = p.extent(1);
    Tensor gx(x.shape());
    for (std::size_t b = 0; b < b_n; ++b) {
        for (std::size_t co = 0; co < c_out; ++co) {
            const double* gyp = gy.data() + (b * c_out + co) * plane;
            for (std::size_t ci = 0; ci < c_in; ++ci) {
                double coeff = p.at(ci, co);
                const double* xp = x.data() + (b * c_in + ci) * plane;
                double* gxp = gx.data() + (b * c_in + ci) * plane;
                double acc = 0.0;
                for (std::size_t i = 0; i < plane; ++i) {
                    gxp[i] += coeff * gyp[i];
                    acc += xp[i] * gyp[i];
                }
                grad_p.at(ci, co) += acc;
            }
        }
    }
    return gx;
}

}  // namespace

Tensor forward_batch(Model& model, const Tensor& input, Mode mode, ForwardTrace* trace) {
    if (input.rank() != 4) {
        throw std::invalid_argument("forward_batch: input must be (B, 3, J, T), got " +
                                    shape_string(input));
    }
    if (input.extent(2) != model.graph.joint_count()) {
        throw std::invalid_argument("forward_batch: joint extent " +
                                    std::to_string(input.extent(2)) + " does not match template '" +
                                    model.config.template_name + "' with " +
                                    std::to_string(model.graph.joint_count()) + " joints");
    }
    const std::size_t b_n = input.extent(0), j_n = input.extent(2), t_n = input.extent(3);
    if (trace) {
        *trace = ForwardTrace{};
        trace->mode = mode;
        trace->input = input;
    }

    Tensor gvfe_linear = gvfe_forward_batched(input, model.gvfe, model.store);
    Tensor encoded;
    if (model.config.gvfe_relu || model.config.gvfe_bn) {
        Tensor stage = model.config.gvfe_relu ? relu(gvfe_linear) : gvfe_linear;
        if (trace && model.config.gvfe_relu) trace->gvfe_relu_out = stage;
        if (model.config.gvfe_bn) {
            BnVars vars;
            encoded = batch_norm_forward(stage, model.store.value(model.gvfe_bn_gamma),
                                         model.store.value(model.gvfe_bn_beta), 1e-5, mode,
                                         model.gvfe_bn_stats, &vars);
            if (trace) trace->gvfe_bn_vars = std::move(vars);
        } else {
            encoded = std::move(stage);
        }
    } else {
        encoded = gvfe_linear;
    }
    if (trace) {
        trace->gvfe_linear = std::move(gvfe_linear);
        trace->gvfe_out = encoded;
    }

    Tensor current = std::move(encoded);
    for (std::size_t k = 0; k < model.blocks.size(); ++k) {
        BlockParams& block = model.blocks[k];
        Tensor sgcn_out = sgcn_forward_batched(current, model.store.value(block.sgcn_weight),
                                               model.graph.normalized_adjacency());
        DhtcnTrace* dt = nullptr;
        BlockTrace bt;
        if (trace) {
            bt.input = current;
            dt = &bt.dhtcn;
        }
        Tensor dhtcn_out = dhtcn_forward_batched(sgcn_out, block.dhtcn, model.store, mode, dt);
        Tensor out;
        if (block.has_projection) {
            out = projection_forward(current, model.store.value(block.projection));
            axpy(1.0, dhtcn_out, out);
        } else {
            out = dhtcn_out;
            axpy(1.0, current, out);
        }
        if (trace) {
            bt.sgcn_out = std::move(sgcn_out);
            bt.output = out;
            trace->blocks.push_back(std::move(bt));
        }
        current = std::move(out);
    }

    // Global average pool over joints and time, then the affine classifier.
    const std::size_t c_last = model.blocks.back().out_channels;
    const std::size_t k_n = model.config.num_classes;
    const double inv_plane = 1.0 / static_cast<double>(j_n * t_n);
    Tensor pooled({b_n, c_last});
    for (std::size_t b = 0; b < b_n; ++b) {
        for (std::size_t c = 0; c < c_last; ++c) {
            const double* xp = current.data() + (b * c_last + c) * j_n * t_n;
            double acc = 0.0;
            for (std::size_t i = 0; i < j_n * t_n; ++i) acc += xp[i];
            pooled.at(b, c) = acc * inv_plane;
        }
    }
    const Tensor& w = model.store.value(model.classifier_weight);
    const Tensor& bias = model.store.value(model.classifier_bias);
    Tensor logits({b_n, k_n});
    for (std::size_t b = 0; b < b_n; ++b) {
        for (std::size_t k = 0; k < k_n; ++k) {
            double acc = bias[k];
            for (std::size_t c = 0; c < c_last; ++c) acc += pooled.at(b, c) * w.at(c, k);
            logits.at(b, k) = acc;
        }
    }
    if (trace) {
        trace->pooled = std::move(pooled);
        trace->logits = logits;
    }
    return logits;
}

Tensor backward_batch(Model& model, const ForwardTrace& trace, const Tensor& grad_logits) {
    const std::size_t b_n = trace.input.extent(0), j_n = trace.input.extent(2),
                      t_n = trace.input.extent(3);
    const std::size_t c_last = model.blocks.back().out_channels;
    const std::size_t k_n = model.config.num_classes;
    const Tensor& w = model.store.value(model.classifier_weight);
    Tensor& gw = model.store.grad(model.classifier_weight);
    Tensor& gbias = model.store.grad(model.classifier_bias);

    Tensor gpooled({b_n, c_last});
    for (std::size_t b = 0; b < b_n; ++b) {
        for (std::size_t k = 0; k < k_n; ++k) {
            double gl = grad_logits.at(b, k);
            gbias[k] += gl;
            for (std::size_t c = 0; c < c_last; ++c) {
                gpooled.at(b, c) += gl * w.at(c, k);
                gw.at(c, k) += trace.pooled.at(b, c) * gl;
            }
        }
    }

    const double inv_plane = 1.0 / static_cast<double>(j_n * t_n);
    Tensor g({b_n, c_last, j_n, t_n});
    for (std::size_t b = 0; b < b_n; ++b) {
        for (std::size_t c = 0; c < c_last; ++c) {
            double v = gpooled.at(b, c) * inv_plane;
            double* gp = g.data() + (b * c_last + c) * j_n * t_n;
            for (std::size_t i = 0; i < j_n * t_n; ++i) gp[i] = v;
        }
    }

    for (std::size_t k = model.blocks.size(); k-- > 0;) {
        BlockParams& block = model.blocks[k];
        const BlockTrace& bt = trace.blocks[k];
        Tensor g_shortcut;
        if (block.has_projection) {
            g_shortcut = projection_backward(bt.input, model.store.value(block.projection), g,
                                             model.store.grad(block.projection));
        } else {
            g_shortcut = g;
        }
        Tensor g_sgcn_out =
            dhtcn_backward_batched(bt.sgcn_out, g, bt.dhtcn, block.dhtcn, model.store);
        Tensor g_input(bt.input.shape());
        sgcn_backward_batched(bt.input, model.store.value(block.sgcn_weight),
                              model.graph.normalized_adjacency(), g_sgcn_out, g_input,
                              model.store.grad(block.sgcn_weight));
        axpy(1.0, g_shortcut, g_input);
        g = std::move(g_input);
    }

    // Back through the encoder head (optional BN, optional ReLU), then the
    // per-joint convolutions.
    if (model.config.gvfe_bn) {
        const Tensor& bn_in = model.config.gvfe_relu ? trace.gvfe_relu_out : trace.gvfe_linear;
        g = batch_norm_backward(bn_in, model.store.value(model.gvfe_bn_gamma), 1e-5, trace.mode,
                                model.gvfe_bn_stats, trace.gvfe_bn_vars, g,
                                model.store.grad(model.gvfe_bn_gamma),
                                model.store.grad(model.gvfe_bn_beta));
    }
    if (model.config.gvfe_relu) {
        g = relu_backward(trace.gvfe_linear, g);
    }
    return gvfe_backward_batched(trace.input, g, model.gvfe, model.store);
}

Tensor model_forward(Model& model, const Tensor& coords, Mode mode) {
    if (coords.rank() != 3) {
        throw std::invalid_argument("model_forward: input must be (3, J, T), got " +
                                    shape_string(coords));
    }
    Tensor batched({1, coords.extent(0), coords.extent(1), coords.extent(2)}, coords.values());
    Tensor logits = forward_batch(model, batched, mode, nullptr);
    return Tensor({logits.extent(1)}, std::move(logits.values()));
}

std::size_t predict_label(const Tensor& logits) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < logits.size(); ++i) {
        if (logits[i] > logits[best]) best = i;
    }
    return best;
}

ParamCount count_parameters(const Model& model) {
    ParamCount count;
    std::vector<std::pair<std::string, std::size_t>>& groups = count.breakdown;
    auto bump = [&groups](const std::string& key, std::size_t n) {
        for (auto& [name, total] : groups) {
            if (name == key) {
                total += n;
                return;
            }
        }
        groups.emplace_back(key, n);
    };
    for (const auto& entry : model.store) {
        count.total += entry.value.size();
        std::string key;
        if (entry.name.rfind("gvfe.", 0) == 0) {
            key = "gvfe";
        } else if (entry.name.rfind("classifier.", 0) == 0) {
            key = "classifier";
        } else {
            // block{k}.{sgcn|residual|dhtcn}.*
            std::size_t first = entry.name.find('.');
            std::size_t second = entry.name.find('.', first + 1);
            key = entry.name.substr(0, second);
        }
        bump(key, entry.value.size());
    }
    return count;
}

std::uint64_t parameter_checksum(const Model& model) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const Tensor& t) {
        const unsigned char* bytes = reinterpret_cast<const unsigned char*>(t.data());
        for (std::size_t i = 0; i < t.size() * sizeof(double); ++i) {
            h ^= bytes[i];
            h *= 1099511628211ULL;
        }
    };
    for (const auto& entry : model.store) mix(entry.value);
    return h;
}

namespace {

// Smallest |pre-ReLU activation| in a trace. Central differences straddle the
// ReLU kink when a probe shifts an activation across zero, so the gradcheck
// point must keep a margin between every activation and zero.
double relu_margin(const Model& model, const ForwardTrace& trace) {
    double margin = std::numeric_limits<double>::infinity();
    auto scan = [&margin](const Tensor& t) {
        for (std::size_t i = 0; i < t.size(); ++i) {
            margin = std::min(margin, std::fabs(t[i]));
        }
    };
    if (model.config.gvfe_relu) scan(trace.gvfe_linear);
    for (const BlockTrace& bt : trace.blocks) {
        for (const DhtcnLayerTrace& lt : bt.dhtcn.layers) scan(lt.conv_out);
    }
    return margin;
}

}  // namespace

GradCheckReport model_grad_check(const ModelConfig& config, std::size_t frames, std::size_t label,
                                 double step, double l2_coeff, const std::string& flip_sign_of) {
    Model model = build_model(config);
    const std::size_t joints = model.graph.joint_count();

    // Draw evaluation points until every ReLU input clears a safety margin;
    // keep the best candidate if none does.
    const double kink_margin = 100.0 * step;
    Tensor p({3, joints, frames});
    double best_margin = -1.0;
    Tensor best_p;
    for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
        Rng rng(derive_seed(config.seed, 555 + attempt));
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = rng.uniform(-1.0, 1.0);
        Tensor input({1, 3, joints, frames}, p.values());
        ForwardTrace trace;
        forward_batch(model, input, Mode::kTrain, &trace);
        double margin = relu_margin(model, trace);
        if (margin > best_margin) {
            best_margin = margin;
            best_p = p;
        }
        if (margin >= kink_margin) break;
    }
    std::size_t input_idx = model.store.add("input.P", std::move(best_p));

    auto loss_fn = [&model, input_idx, label, frames, joints, l2_coeff,
                    &flip_sign_of](ParameterStore& store) {
        Tensor input({1, 3, joints, frames}, store.value(input_idx).values());
        ForwardTrace trace;
        Tensor logits = forward_batch(model, input, Mode::kTrain, &trace);
        Tensor row({logits.extent(1)}, std::move(logits.values()));
        SoftmaxResult sm = softmax_cross_entropy(row, label);
        Tensor grad_row = softmax_cross_entropy_backward(sm, label);
        Tensor grad_logits({1, grad_row.extent(0)}, std::move(grad_row.values()));
        Tensor grad_input = backward_batch(model, trace, grad_logits);
        axpy(1.0, Tensor(store.value(input_idx).shape(), std::move(grad_input.values())),
             store.grad(input_idx));
        double loss = sm.loss;
        if (l2_coeff != 0.0) {
            for (std::size_t i = 0; i < store.count(); ++i) {
                const Tensor& value = store.value(i);
                Tensor& grad = store.grad(i);
                for (std::size_t k = 0; k < value.size(); ++k) {
                    double shifted = value[k] + 2.0;
                    loss += l2_coeff * shifted * shifted;
                    grad[k] += 2.0 * l2_coeff * shifted;
                }
            }
        }
        if (!flip_sign_of.empty()) {
            Tensor& g = store.grad(flip_sign_of);
            for (std::size_t i = 0; i < g.size(); ++i) g[i] = -g[i];
        }
        return loss;
    };
    return grad_check_report(loss_fn, model.store, step);
}

namespace {

constexpr char kCheckpointMagic[8] = {'S', 'T', 'G', 'C', 'N', 'C', 'P', '1'};

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_blob(std::ostream& out, const std::string& name, const Tensor& t) {
    write_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t e : t.shape()) write_u64(out, e);
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
}

std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw CheckpointError("checkpoint truncated");
    return v;
}

std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw CheckpointError("checkpoint truncated");
    return v;
}

struct Blob {
    std::string name;
    Tensor tensor;
};

Blob read_blob(std::istream& in) {
    Blob b;
    std::uint32_t name_len = read_u32(in);
    if (name_len > 4096) throw CheckpointError("checkpoint blob name too long");
    b.name.resize(name_len);
    in.read(b.name.data(), name_len);
    std::uint32_t rank = read_u32(in);
    if (rank == 0 || rank > 8) throw CheckpointError("checkpoint blob rank out of range");
    std::vector<std::size_t> shape(rank);
    std::size_t n = 1;
    for (auto& e : shape) {
        e = static_cast<std::size_t>(read_u64(in));
        if (e == 0 || n > (1ULL << 40) / e) throw CheckpointError("checkpoint blob too large");
        n *= e;
    }
    std::vector<double> data(n);
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw CheckpointError("checkpoint truncated");
    b.tensor = Tensor(std::move(shape), std::move(data));
    return b;
}

// Buffers follow the parameters: running mean/var per batch-norm instance, in
// model order.
template <typename ModelT, typename Fn>
void visit_buffers(ModelT& model, Fn&& fn) {
    if (model.config.gvfe_bn) {
        fn("gvfe.bn.running_mean", model.gvfe_bn_stats.mean);
        fn("gvfe.bn.running_var", model.gvfe_bn_stats.var);
    }
    for (std::size_t k = 0; k < model.blocks.size(); ++k) {
        for (std::size_t n = 0; n < model.blocks[k].dhtcn.layers.size(); ++n) {
            std::string base =
                "block" + std::to_string(k) + ".dhtcn.layer" + std::to_string(n) + ".running_";
            fn(base + "mean", model.blocks[k].dhtcn.layers[n].stats.mean);
            fn(base + "var", model.blocks[k].dhtcn.layers[n].stats.var);
        }
    }
}

}  // namespace

void save_checkpoint(const Model& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError("cannot open '" + path + "' for writing");
    out.write(kCheckpointMagic, sizeof kCheckpointMagic);
    std::string config = model_config_to_text(model.config);
    write_u64(out, config.size());
    out.write(config.data(), static_cast<std::streamsize>(config.size()));
    std::size_t buffer_count = 0;
    visit_buffers(model, [&buffer_count](const std::string&, const Tensor&) { ++buffer_count; });
    write_u64(out, model.store.count() + buffer_count);
    for (const auto& entry : model.store) write_blob(out, entry.name, entry.value);
    visit_buffers(model, [&out](const std::string& name, const Tensor& t) {
        write_blob(out, name, t);
    });
    if (!out) throw CheckpointError("write failed for '" + path + "'");
}

Model load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint '" + path + "'");
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
        throw CheckpointError("'" + path + "' is not a checkpoint (bad magic)");
    }
    std::uint64_t config_len = read_u64(in);
    if (config_len > (1ULL << 20)) throw CheckpointError("checkpoint config echo too large");
    std::string config_text(config_len, '\0');
    in.read(config_text.data(), static_cast<std::streamsize>(config_len));
    if (!in) throw CheckpointError("checkpoint truncated");
    ModelConfig config;
    try {
        config = model_config_from_text(config_text);
    } catch (const std::exception& e) {
        throw CheckpointError(std::string("checkpoint config echo invalid: ") + e.what());
    }
    Model model = build_model(config);

    std::uint64_t blob_count = read_u64(in);
    std::map<std::string, Tensor> buffers;
    std::size_t params_seen = 0;
    for (std::uint64_t i = 0; i < blob_count; ++i) {
        Blob blob = read_blob(in);
        if (model.store.contains(blob.name)) {
            Tensor& dst = model.store.value(blob.name);
            if (!dst.same_shape(blob.tensor)) {
                throw CheckpointError("checkpoint blob '" + blob.name + "' has shape " +
                                      shape_string(blob.tensor) + ", expected " +
                                      shape_string(dst));
            }
            dst = std::move(blob.tensor);
            ++params_seen;
        } else {
            buffers.emplace(blob.name, std::move(blob.tensor));
        }
    }
    if (params_seen != model.store.count()) {
        throw CheckpointError("checkpoint is missing parameters (" + std::to_string(params_seen) +
                              " of " + std::to_string(model.store.count()) + ")");
    }
    std::size_t buffers_seen = 0;
    visit_buffers(model, [&buffers, &buffers_seen](const std::string& name, Tensor& t) {
        auto it = buffers.find(name);
        if (it == buffers.end()) throw CheckpointError("checkpoint is missing buffer '" + name + "'");
        if (!t.same_shape(it->second)) {
            throw CheckpointError("checkpoint buffer '" + name + "' has the wrong shape");
        }
        t = std::move(it->second);
        ++buffers_seen;
    });
    if (buffers_seen != buffers.size()) {
        throw CheckpointError("checkpoint contains unknown blobs");
    }
    return model;
}

}  // namespace stgcn
