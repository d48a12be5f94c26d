// Acceptance suite: prints one PASS/FAIL line per criterion and exits with
// the number of failures. Each check pins its tolerance in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "stgcn/cli.hpp"
#include "stgcn/dataset.hpp"
#include "stgcn/dhtcn.hpp"
#include "stgcn/graph.hpp"
#include "stgcn/gvfe.hpp"
#include "stgcn/model.hpp"
#include "stgcn/rng.hpp"
#include "stgcn/run_config.hpp"
#include "stgcn/skl.hpp"
#include "stgcn/synth.hpp"
#include "stgcn/trainer.hpp"

using namespace stgcn;

namespace {

struct Criterion {
    std::string name;
    std::function<bool(std::string&)> run;
};

Tensor random_tensor(std::vector<std::size_t> shape, std::uint64_t seed, double lo = -1.0,
                     double hi = 1.0) {
    Rng rng(seed);
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

// ---- gradient integrity -----------------------------------------------

bool check_gradients(std::string& detail) {
    auto t0 = std::chrono::steady_clock::now();
    ModelConfig config;
    config.template_name = "chain3";
    config.num_classes = 2;
    config.blocks = {4, 4};
    GradCheckReport report = model_grad_check(config, 8, 0, 1e-5, 0.1);
    bool input_checked = false;
    double worst = 0.0;
    for (const GradCheckEntry& entry : report.entries) {
        worst = std::max(worst, entry.max_rel_err);
        if (entry.name == "input.P") input_checked = true;
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream out;
    out << "max_rel_err " << worst << " over " << report.entries.size()
        << " tensors (input included: " << (input_checked ? "yes" : "no") << "), " << secs << "s";
    detail = out.str();
    return worst < 1e-4 && input_checked && secs < 60.0;
}

// ---- adjacency normalization vs dense oracle ---------------------------

Tensor normalize_oracle(const Tensor& a) {
    const std::size_t n = a.extent(0);
    Tensor with_loops({n, n});
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            with_loops.at(i, j) = a.at(i, j) + (i == j ? 1.0 : 0.0);
        }
    }
    Tensor d_inv_sqrt({n, n});
    for (std::size_t i = 0; i < n; ++i) {
        double degree = 0.0;
        for (std::size_t j = 0; j < n; ++j) degree += with_loops.at(i, j);
        d_inv_sqrt.at(i, i) = 1.0 / std::sqrt(degree);
    }
    auto matmul = [n](const Tensor& x, const Tensor& y) {
        Tensor out({n, n});
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                double acc = 0.0;
                for (std::size_t k = 0; k < n; ++k) acc += x.at(i, k) * y.at(k, j);
                out.at(i, j) = acc;
            }
        }
        return out;
    };
    return matmul(matmul(d_inv_sqrt, with_loops), d_inv_sqrt);
}

bool check_normalization(std::string& detail) {
    auto t0 = std::chrono::steady_clock::now();
    std::size_t graphs = 0;
    double worst = 0.0;
    for (std::size_t n = 1; n <= 6; ++n) {
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
        }
        const std::size_t subsets = std::size_t{1} << pairs.size();
        for (std::size_t mask = 0; mask < subsets; ++mask) {
            std::vector<std::pair<std::size_t, std::size_t>> edges;
            for (std::size_t b = 0; b < pairs.size(); ++b) {
                if (mask & (std::size_t{1} << b)) edges.push_back(pairs[b]);
            }
            Tensor a = build_adjacency(n, edges);
            Tensor fast = normalize_adjacency(a);
            Tensor slow = normalize_oracle(a);
            for (std::size_t i = 0; i < fast.size(); ++i) {
                worst = std::max(worst, std::fabs(fast[i] - slow[i]));
            }
            ++graphs;
        }
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream out;
    out << graphs << " graphs, max |diff| " << worst << ", " << secs << "s";
    detail = out.str();
    return graphs == 33867 && worst < 1e-12 && secs < 60.0;
}

// ---- encoder causality --------------------------------------------------

bool check_causality(std::string& detail) {
    const std::size_t j_n = 7, t_n = 40;
    ParameterStore store;
    GvfeParams params = gvfe_init(store, j_n, GvfeConfig{}, 2024);
    Tensor coords = random_tensor({3, j_n, t_n}, 31);
    Tensor base = gvfe_forward(coords, params, store);
    Rng rng(32);
    std::size_t checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t t = 1 + rng.index(t_n - 1);
        Tensor bumped = coords;
        bumped.at(rng.index(3), rng.index(j_n), t) += rng.uniform(0.25, 2.0);
        Tensor out = gvfe_forward(bumped, params, store);
        for (std::size_t c = 0; c < base.extent(0); ++c) {
            for (std::size_t j = 0; j < j_n; ++j) {
                for (std::size_t s = 0; s < t; ++s) {
                    if (out.at(c, j, s) != base.at(c, j, s)) {
                        detail = "leak before the perturbed frame";
                        return false;
                    }
                }
            }
        }
        ++checked;
    }
    detail = std::to_string(checked) + " perturbations, zero pre-frame drift (bitwise)";
    return checked == 100;
}

// ---- residual identity ---------------------------------------------------

bool check_residual_identity(std::string& detail) {
    for (std::size_t layers : {std::size_t{1}, std::size_t{2}, std::size_t{3}}) {
        ParameterStore store;
        DhtcnConfig config;
        config.channels = 3;
        config.layers = layers;
        DhtcnParams params = dhtcn_init(store, "blk", config, 5);
        for (auto& layer : params.layers) {
            store.value(layer.kernel).fill(0.0);
            store.value(layer.beta).fill(0.0);
        }
        Tensor input = random_tensor({3, 4, 17}, 700 + layers);
        Tensor out = dhtcn_forward(input, params, store, Mode::kTrain);
        for (std::size_t i = 0; i < input.size(); ++i) {
            if (out[i] != input[i]) {
                detail = "not exact at N = " + std::to_string(layers);
                return false;
            }
        }
    }
    detail = "exact identity for N in {1, 2, 3}";
    return true;
}

// ---- receptive field -----------------------------------------------------

std::size_t measured_window(DhtcnParams& params, const ParameterStore& store, std::size_t c,
                            std::size_t t_n, std::size_t t0) {
    Tensor base_in = Tensor::ones({c, 1, t_n});
    Tensor base = dhtcn_forward(base_in, params, store, Mode::kEval);
    Tensor bumped_in = base_in;
    bumped_in.at(0, 0, t0) += 1.0;
    Tensor bumped = dhtcn_forward(bumped_in, params, store, Mode::kEval);
    std::size_t affected = 0;
    for (std::size_t t = 0; t < t_n; ++t) {
        for (std::size_t ch = 0; ch < c; ++ch) {
            if (base.at(ch, 0, t) != bumped.at(ch, 0, t)) {
                ++affected;
                break;
            }
        }
    }
    return affected;
}

bool check_receptive_field(std::string& detail) {
    std::ostringstream out;
    for (std::size_t layers : {std::size_t{1}, std::size_t{2}, std::size_t{3}}) {
        for (std::size_t window : {std::size_t{3}, std::size_t{9}}) {
            ParameterStore store;
            DhtcnConfig config;
            config.channels = 2;
            config.layers = layers;
            config.temporal_window = window;
            DhtcnParams params = dhtcn_init(store, "blk", config, 11);
            for (auto& layer : params.layers) {
                store.value(layer.kernel).fill(0.1);
                layer.stats.mean.fill(0.0);
                layer.stats.var.fill(1.0);
            }
            std::size_t expected = receptive_field(layers, window);
            std::size_t t_n = 2 * expected + 9;
            std::size_t measured = measured_window(params, store, 2, t_n, t_n / 2);
            if (measured != expected) {
                out << "N=" << layers << " T_w1=" << window << ": measured " << measured
                    << " vs " << expected;
                detail = out.str();
                return false;
            }
        }
    }
    out << "measured == formula on {1,2,3}x{3,9}; N=2,T_w1=9 -> "
        << receptive_field(2, 9);
    detail = out.str();
    return receptive_field(2, 9) == 25;
}

// ---- parameter accounting --------------------------------------------------

std::size_t count_oracle(const ModelConfig& c) {
    const std::size_t joints = find_template(c.template_name).joint_count;
    std::size_t total = joints * c.gvfe_out_channels * c.gvfe_temporal_window * 3;
    if (c.bias) total += joints * c.gvfe_out_channels;
    if (c.gvfe_bn) total += 2 * c.gvfe_out_channels;
    std::size_t prev = c.gvfe_out_channels;
    for (std::size_t ck : c.blocks) {
        total += prev * ck;
        if (prev != ck) total += prev * ck;
        total += c.dhtcn_layers * ck * c.dhtcn_temporal_window * ck;
        if (c.bias) total += c.dhtcn_layers * ck;
        total += 2 * c.dhtcn_layers * ck;
        prev = ck;
    }
    total += prev * c.num_classes + c.num_classes;
    return total;
}

bool check_parameter_accounting(std::string& detail) {
    std::vector<ModelConfig> matrix;
    matrix.push_back(ModelConfig{});  // ntu25 defaults
    {
        ModelConfig c;
        c.template_name = "chain3";
        c.num_classes = 2;
        c.blocks = {4, 4};
        matrix.push_back(c);
    }
    {
        ModelConfig c;
        c.template_name = "chain7";
        c.blocks = {16, 16};
        matrix.push_back(c);
    }
    {
        ModelConfig c;
        c.template_name = "chain7";
        c.blocks = {8, 16, 32};
        c.bias = true;
        c.gvfe_bn = true;
        c.gvfe_relu = true;
        c.dhtcn_layers = 3;
        c.dhtcn_temporal_window = 3;
        matrix.push_back(c);
    }
    {
        ModelConfig c;
        c.template_name = "clique2";
        c.num_classes = 3;
        c.blocks = {8};
        c.gvfe_out_channels = 4;
        c.gvfe_temporal_window = 5;
        matrix.push_back(c);
    }
    {
        ModelConfig c;
        c.template_name = "chain3";
        c.num_classes = 6;
        c.blocks = {4, 4, 8, 8};
        c.dhtcn_layers = 1;
        matrix.push_back(c);
    }
    for (const ModelConfig& c : matrix) {
        Model m = build_model(c);
        if (count_parameters(m).total != count_oracle(c)) {
            detail = "mismatch on template " + c.template_name;
            return false;
        }
    }
    Model full = build_model(ModelConfig{});
    std::size_t gvfe = 0;
    for (const auto& [name, n] : count_parameters(full).breakdown) {
        if (name == "gvfe") gvfe = n;
    }
    detail = std::to_string(matrix.size()) + " configs match the oracle; default gvfe = " +
             std::to_string(gvfe);
    return gvfe == 5400;
}

// ---- end-to-end learning ----------------------------------------------------

bool check_learning(std::string& detail) {
    auto t0 = std::chrono::steady_clock::now();
    ModelConfig mc;
    mc.template_name = "chain7";
    mc.num_classes = 4;
    mc.blocks = {16, 16};
    TrainConfig tc;
    tc.epochs = 25;  // within the 50-epoch budget
    tc.batch_size = 8;
    tc.checkpoint_interval = 0;
    tc.out_dir = "acceptance_out/learn_a";
    Dataset ds = make_synth_dataset("chain7", 4, 400, 100, 64, 7);
    TrainOutputs a = train(mc, tc, ds);
    tc.out_dir = "acceptance_out/learn_b";
    TrainOutputs b = train(mc, tc, ds);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    bool curves_identical = a.report.epochs.size() == b.report.epochs.size();
    for (std::size_t e = 0; curves_identical && e < a.report.epochs.size(); ++e) {
        curves_identical = a.report.epochs[e].train_loss == b.report.epochs[e].train_loss &&
                           a.report.epochs[e].test_accuracy == b.report.epochs[e].test_accuracy;
    }
    double final_acc = a.report.epochs.back().test_accuracy;
    std::ostringstream out;
    out << "test_acc " << final_acc << " after " << a.report.epochs.size() << " epochs, "
        << (curves_identical ? "curves identical across reruns" : "CURVES DIVERGED") << ", "
        << secs << "s for both runs";
    detail = out.str();
    return final_acc >= 0.90 && curves_identical && secs < 600.0;
}

// ---- SKL round trip -----------------------------------------------------------

bool sequences_identical(const SkeletonSequence& a, const SkeletonSequence& b) {
    if (!a.joints.same_shape(b.joints)) return false;
    for (std::size_t i = 0; i < a.joints.size(); ++i) {
        if (a.joints[i] != b.joints[i]) return false;
    }
    return a.label == b.label && a.subject == b.subject && a.template_name == b.template_name;
}

bool check_skl_round_trip(std::string& detail) {
    std::vector<SkeletonSequence> corpus;
    // Generated spread: every template, every class, varying lengths.
    const char* templates[] = {"chain3", "chain7", "clique2", "ntu25"};
    for (std::size_t i = 0; i < 44; ++i) {
        const SkeletonTemplate& tmpl = find_template(templates[i % 4]);
        corpus.push_back(
            synth_generate(i % 4, tmpl, 16 + (i % 5) * 7, derive_seed(4242, i)));
    }
    // Edge cases, built by hand.
    {
        SkeletonSequence s;  // single frame
        s.template_name = "chain3";
        s.label = 1;
        s.subject = 9;
        s.joints = Tensor({3, 3, 1}, {-1.5, 0.25, 3e-7, 0.0, -0.0, 12.75, -9.0, 1e300 * 0.0 + 2.0, 0.5});
        corpus.push_back(s);
    }
    {
        SkeletonSequence s;  // all-negative coordinates
        s.template_name = "clique2";
        s.label = 0;
        s.subject = -3;
        s.joints = Tensor({3, 2, 2}, {-1, -2, -3, -4, -5, -6, -7, -8, -9, -10, -11, -12});
        corpus.push_back(s);
    }
    {
        SkeletonSequence s;  // extreme magnitudes that must survive printing
        s.template_name = "chain3";
        s.label = 3;
        s.subject = 0;
        s.joints = Tensor({3, 3, 1});
        s.joints[0] = 1e-308;
        s.joints[1] = 1.7976931348623157e308;
        s.joints[2] = 0.1 + 0.2;  // a value with no short decimal form
        corpus.push_back(s);
    }
    for (std::uint64_t i = 0; i < 3; ++i) {  // unknown template names are allowed
        SkeletonSequence s;
        s.template_name = "custom" + std::to_string(i);
        s.label = i;
        s.subject = 77;
        s.joints = random_tensor({3, 4, 3}, 900 + i, -100.0, 100.0);
        corpus.push_back(s);
    }
    if (corpus.size() != 50) {
        detail = "corpus size " + std::to_string(corpus.size());
        return false;
    }
    for (const SkeletonSequence& s : corpus) {
        SkeletonSequence back = parse_skl(serialize_skl(s));
        if (!sequences_identical(s, back)) {
            detail = "round trip drift (template " + s.template_name + ")";
            return false;
        }
    }
    // A file with comments parses to the same sequence.
    {
        std::string text = serialize_skl(corpus[0]);
        std::string commented = "# leading comment\n" + text + "# trailing comment\n";
        if (!sequences_identical(parse_skl(commented), corpus[0])) {
            detail = "comment handling drift";
            return false;
        }
    }
    // Malformed fixtures map to their documented error kinds.
    struct Fixture {
        const char* text;
        SklErrorKind kind;
    };
    const Fixture fixtures[] = {
        {"SKL 9\ntemplate chain3\ndims 3 3 1\nlabel 0\nsubject 0\n0 0 0 0 0 0 0 0 0\n",
         SklErrorKind::kBadMagic},
        {"SKL 1\ntemplate chain3\ndims 3 3 2\nlabel 0\nsubject 0\n0 0 0 0 0 0 0 0 0\n",
         SklErrorKind::kExtentMismatch},
        {"SKL 1\ntemplate chain3\ndims 3 3 1\nlabel 0\nsubject 0\n0 0 0 0 0 0\n",
         SklErrorKind::kExtentMismatch},
        {"SKL 1\ntemplate chain3\ndims 3 3 1\nlabel 0\nsubject 0\n0 0 oops 0 0 0 0 0 0\n",
         SklErrorKind::kNonNumeric},
        {"SKL 1\ntemplate chain3\ndims 3 3 1\nlabel 0\nsubject 0\n0 nan 0 0 0 0 0 0 0\n",
         SklErrorKind::kNonFinite},
        {"SKL 1\ntemplate chain3\ndims 3 4 1\nlabel 0\nsubject 0\n0 0 0 0 0 0 0 0 0 0 0 0\n",
         SklErrorKind::kExtentMismatch},
        {"SKL 1\ntemplate chain3\nlabel 0\n", SklErrorKind::kBadHeader},
    };
    for (const Fixture& f : fixtures) {
        try {
            parse_skl(f.text);
            detail = "malformed fixture accepted";
            return false;
        } catch (const SklError& e) {
            if (e.kind() != f.kind) {
                detail = "wrong error kind for a malformed fixture";
                return false;
            }
        }
    }
    detail = "50-file corpus identical after round trip; 7 malformed fixtures rejected";
    return true;
}

// ---- checkpoint round trip ------------------------------------------------------

bool check_checkpoint_round_trip(std::string& detail) {
    ModelConfig config;
    config.template_name = "chain7";
    config.num_classes = 4;
    config.blocks = {8, 16};
    Model m = build_model(config);
    for (int i = 0; i < 3; ++i) {
        forward_batch(m, random_tensor({2, 3, 7, 24}, 600 + i), Mode::kTrain, nullptr);
    }
    std::filesystem::create_directories("acceptance_out");
    const std::string path = "acceptance_out/roundtrip.ckpt";
    save_checkpoint(m, path);
    Model loaded = load_checkpoint(path);
    for (int i = 0; i < 20; ++i) {
        Tensor input = random_tensor({3, 7, 24}, 700 + i);
        Tensor la = model_forward(m, input, Mode::kEval);
        Tensor lb = model_forward(loaded, input, Mode::kEval);
        for (std::size_t k = 0; k < la.size(); ++k) {
            if (la[k] != lb[k]) {
                detail = "logit drift on input " + std::to_string(i);
                return false;
            }
        }
    }
    detail = "20 random inputs, logits bitwise identical after save/load";
    return true;
}

}  // namespace

int main() {
    std::vector<Criterion> criteria = {
        {"gradient-integrity", check_gradients},
        {"adjacency-normalization-oracle", check_normalization},
        {"encoder-causality", check_causality},
        {"temporal-residual-identity", check_residual_identity},
        {"receptive-field", check_receptive_field},
        {"parameter-accounting", check_parameter_accounting},
        {"end-to-end-learning", check_learning},
        {"skl-round-trip", check_skl_round_trip},
        {"checkpoint-round-trip", check_checkpoint_round_trip},
    };
    int failures = 0;
    for (Criterion& criterion : criteria) {
        std::string detail;
        bool ok = false;
        try {
            ok = criterion.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("%s %s (%s)\n", ok ? "PASS" : "FAIL", criterion.name.c_str(),
                    detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
                criteria.size());
    return failures;
}
