#include "stgcn/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "stgcn/keyvalue.hpp"
#include "stgcn/rng.hpp"
#include "stgcn/run_config.hpp"
#include "stgcn/synth.hpp"

namespace stgcn::cli {

namespace {

constexpr double kGradCheckThreshold = 1e-4;
constexpr double kGradCheckStep = 1e-5;
// Quadratic conditioning term of the gradcheck objective. Large enough that
// its gradient (2 * coeff * (theta + 2), at least 0.2 for entries in (-2, 2))
// can never be cancelled by a cross-entropy gradient, keeping every element
// orders of magnitude above the central-difference rounding floor.
constexpr double kGradCheckL2 = 0.1;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("<file>", "cannot read config file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

RunConfig load_run_config(const std::string& config_path,
                          const std::vector<std::string>& overrides) {
    std::string text = config_path.empty() ? std::string() : read_file(config_path);
    return parse_run_config(text, overrides);
}

ModelConfig tiny_reference_config() {
    ModelConfig config;
    config.template_name = "chain3";
    config.num_classes = 2;
    config.blocks = {4, 4};
    return config;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
}

}  // namespace

int cmd_train(const std::string& config_path, const std::vector<std::string>& overrides) {
    RunConfig config;
    Dataset dataset;
    try {
        config = load_run_config(config_path, overrides);
        dataset = build_dataset(config);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
    try {
        TrainOutputs outputs = train(config.model, config.train, dataset);
        std::string report_path = config.train.out_dir + "/report.csv";
        write_text_file(report_path, outputs.report.to_csv());
        if (config.data.source == "synth") {
            // Persist the test split so `eval` can reproduce the reported
            // accuracy from files alone.
            std::string test_dir = config.train.out_dir + "/test_set";
            std::filesystem::create_directories(test_dir);
            for (std::size_t i = 0; i < dataset.test.size(); ++i) {
                char name[32];
                std::snprintf(name, sizeof name, "/sample_%04zu.skl", i);
                save_skl_file(dataset.test[i], test_dir + name);
            }
        }
        const EpochStats& last = outputs.report.epochs.back();
        std::printf("epochs %zu\n", outputs.report.epochs.size());
        std::printf("final_train_loss %s\n", format_double(last.train_loss).c_str());
        std::printf("final_train_acc %s\n", format_double(last.train_accuracy).c_str());
        std::printf("final_test_acc %s\n", format_double(last.test_accuracy).c_str());
        std::printf("report %s\n", report_path.c_str());
        std::printf("checkpoint %s\n", outputs.final_checkpoint.c_str());
        return kExitOk;
    } catch (const DivergenceError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitDiverged;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
}

int cmd_eval(const std::string& checkpoint_path, const std::string& data_dir) {
    try {
        Model model = load_checkpoint(checkpoint_path);
        std::vector<SkeletonSequence> samples = load_skl_dir(data_dir);
        if (samples.empty()) {
            std::fprintf(stderr, "error: no .skl files in '%s'\n", data_dir.c_str());
            return kExitUsage;
        }
        for (const auto& s : samples) {
            if (s.template_name != model.config.template_name) {
                std::fprintf(stderr, "error: sample template '%s' does not match model '%s'\n",
                             s.template_name.c_str(), model.config.template_name.c_str());
                return kExitUsage;
            }
            if (s.label >= model.config.num_classes) {
                std::fprintf(stderr, "error: sample label %zu out of range (%zu classes)\n",
                             s.label, model.config.num_classes);
                return kExitUsage;
            }
        }
        EvalResult result = evaluate(model, samples);
        std::printf("samples %zu\n", result.total);
        std::printf("accuracy %s\n", format_double(result.accuracy).c_str());
        for (std::size_t c = 0; c < result.per_class_total.size(); ++c) {
            double acc = result.per_class_total[c] == 0
                             ? 0.0
                             : static_cast<double>(result.per_class_correct[c]) /
                                   static_cast<double>(result.per_class_total[c]);
            std::printf("class %zu %zu %zu %s\n", c, result.per_class_correct[c],
                        result.per_class_total[c], format_double(acc).c_str());
        }
        return kExitOk;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
}

int cmd_gradcheck(const std::string& config_path, const std::vector<std::string>& overrides,
                  const std::string& inject_sign_fault) {
    ModelConfig model_config;
    try {
        if (config_path.empty() && overrides.empty()) {
            model_config = tiny_reference_config();
        } else {
            RunConfig config = load_run_config(config_path, overrides);
            model_config = config.model;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
    try {
        std::printf("objective cross_entropy+l2(%s)\n", format_double(kGradCheckL2).c_str());
        std::printf("step %s\n", format_double(kGradCheckStep).c_str());
        GradCheckReport report =
            model_grad_check(model_config, 8, 0, kGradCheckStep, kGradCheckL2, inject_sign_fault);
        // Collapse per-parameter maxima into one line per module.
        std::vector<std::pair<std::string, double>> modules;
        for (const GradCheckEntry& entry : report.entries) {
            std::string module = entry.name.substr(0, entry.name.find('.'));
            bool found = false;
            for (auto& [name, err] : modules) {
                if (name == module) {
                    err = std::max(err, entry.max_rel_err);
                    found = true;
                }
            }
            if (!found) modules.emplace_back(module, entry.max_rel_err);
        }
        for (const auto& [name, err] : modules) {
            std::printf("module %s %s\n", name.c_str(), format_double(err).c_str());
        }
        std::printf("max_rel_err %s\n", format_double(report.max_rel_err).c_str());
        std::printf("threshold %s\n", format_double(kGradCheckThreshold).c_str());
        bool pass = report.max_rel_err < kGradCheckThreshold;
        std::printf("result %s\n", pass ? "PASS" : "FAIL");
        if (!pass) {
            for (const GradCheckEntry& entry : report.entries) {
                if (entry.max_rel_err >= kGradCheckThreshold) {
                    std::printf("offending %s %s\n", entry.name.c_str(),
                                format_double(entry.max_rel_err).c_str());
                }
            }
            return kExitVerificationFailed;
        }
        return kExitOk;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
}

int cmd_params(const std::string& config_path, const std::vector<std::string>& overrides) {
    try {
        RunConfig config = load_run_config(config_path, overrides);
        Model model = build_model(config.model);
        ParamCount count = count_parameters(model);
        for (const auto& [name, n] : count.breakdown) {
            std::printf("param %s %zu\n", name.c_str(), n);
        }
        std::printf("total %zu\n", count.total);
        return kExitOk;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
}

int cmd_synth(const SynthOptions& options) {
    try {
        if (options.classes.empty()) {
            throw std::invalid_argument("need at least one class");
        }
        const SkeletonTemplate& tmpl = find_template(options.template_name);
        std::filesystem::create_directories(options.out_dir);
        // count / classes each, remainder to the lowest class indices.
        std::size_t base = options.count / options.classes.size();
        std::size_t remainder = options.count % options.classes.size();
        std::size_t written = 0;
        for (std::size_t ci = 0; ci < options.classes.size(); ++ci) {
            std::size_t n = base + (ci < remainder ? 1 : 0);
            for (std::size_t k = 0; k < n; ++k) {
                SkeletonSequence seq =
                    synth_generate(options.classes[ci], tmpl, options.frames,
                                   derive_seed(options.seed, ci * 100000 + k), options.sigma);
                char name[48];
                std::snprintf(name, sizeof name, "/synth_c%zu_%04zu.skl", options.classes[ci], k);
                save_skl_file(seq, options.out_dir + name);
                ++written;
            }
        }
        std::printf("wrote %zu files to %s\n", written, options.out_dir.c_str());
        return kExitOk;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
}

int run(int argc, const char* const* argv) {
    CLI::App app{"Skeleton action recognition toolkit: per-joint vertex feature encoding and "
                 "dilated hierarchical temporal blocks in a compact spatial-temporal GCN"};
    app.require_subcommand(1);
    app.footer(schema_help());

    std::string config_path;
    std::vector<std::string> overrides;
    std::string checkpoint_path;
    std::string data_dir;
    std::string fault;
    SynthOptions synth;
    std::string classes_text = "0,1,2,3";

    CLI::App* train_cmd = app.add_subcommand("train", "train a model and write report + checkpoints");
    train_cmd->add_option("--config", config_path, "config file (key = value lines)")->required();
    train_cmd->add_option("--set", overrides, "override a config key, e.g. --set epochs=1");
    train_cmd->footer(schema_help());

    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a directory of SKL files");
    eval_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
    eval_cmd->add_option("--data", data_dir, "directory of .skl files")->required();

    CLI::App* grad_cmd = app.add_subcommand(
        "gradcheck", "compare analytic gradients against central differences");
    grad_cmd->add_option("--config", config_path,
                         "optional config; defaults to the tiny reference model");
    grad_cmd->add_option("--set", overrides, "override a config key");
    grad_cmd->add_option("--inject-sign-fault", fault, "test hook: negate one analytic gradient")
        ->group("");
    grad_cmd->footer(schema_help());

    CLI::App* params_cmd = app.add_subcommand("params", "print the parameter count breakdown");
    params_cmd->add_option("--config", config_path, "optional config; defaults otherwise");
    params_cmd->add_option("--set", overrides, "override a config key");
    params_cmd->footer(schema_help());

    CLI::App* synth_cmd = app.add_subcommand("synth", "generate labeled synthetic SKL files");
    synth_cmd->add_option("--out", synth.out_dir, "output directory")->required();
    synth_cmd->add_option("--count", synth.count, "number of files, balanced across classes");
    synth_cmd->add_option("--seed", synth.seed, "generator seed");
    synth_cmd->add_option("--template", synth.template_name, "skeleton template");
    synth_cmd->add_option("--frames", synth.frames, "frames per sample");
    synth_cmd->add_option("--classes", classes_text, "comma-separated class ids");
    synth_cmd->add_option("--sigma", synth.sigma, "coordinate jitter stddev in meters");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (train_cmd->parsed()) return cmd_train(config_path, overrides);
    if (eval_cmd->parsed()) return cmd_eval(checkpoint_path, data_dir);
    if (grad_cmd->parsed()) return cmd_gradcheck(config_path, overrides, fault);
    if (params_cmd->parsed()) return cmd_params(config_path, overrides);
    if (synth_cmd->parsed()) {
        try {
            auto list = parse_uint_list(classes_text);
            synth.classes.assign(list.begin(), list.end());
        } catch (const std::exception& e) {
            std::fprintf(stderr, "error: --classes: %s\n", e.what());
            return kExitUsage;
        }
        return cmd_synth(synth);
    }
    return kExitUsage;
}

}  // namespace stgcn::cli
