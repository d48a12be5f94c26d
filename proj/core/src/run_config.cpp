#include "stgcn/run_config.hpp"

#include "stgcn/keyvalue.hpp"

namespace stgcn {

namespace {

struct SchemaKey {
    const char* name;
    const char* fallback;
    const char* description;
};

constexpr SchemaKey kSchema[] = {
    {"template", "ntu25", "skeleton template name (ntu25, chain7, chain3, clique2)"},
    {"num_classes", "4", "number of action classes (>= 2)"},
    {"gvfe_out_channels", "8", "encoder output channels per joint"},
    {"gvfe_temporal_window", "9", "encoder causal window length"},
    {"blocks", "64,128,128,256", "per-block output channels, comma separated"},
    {"dhtcn_layers", "2", "dilated temporal layers per block (dilations 1,2,4,...)"},
    {"dhtcn_temporal_window", "9", "temporal window of each dilated layer (odd)"},
    {"gvfe_relu", "false", "ablation: ReLU after the encoder"},
    {"gvfe_bn", "false", "ablation: batch norm after the encoder"},
    {"bias", "false", "bias terms on all convolutions"},
    {"seed", "42", "model initialization seed"},
    {"epochs", "50", "training epochs (>= 1)"},
    {"batch_size", "8", "samples per SGD step"},
    {"learning_rate", "0.01", "base learning rate"},
    {"decay_epochs", "30,40", "epochs at which the rate is multiplied by decay_factor"},
    {"decay_factor", "0.1", "multiplicative step decay"},
    {"momentum", "0", "SGD momentum (0 = plain SGD)"},
    {"weight_decay", "0", "L2 penalty coefficient"},
    {"train_seed", "1", "shuffle seed for the training loop"},
    {"checkpoint_interval", "10", "epochs between checkpoints (0 = final only)"},
    {"out_dir", "out", "output directory for reports and checkpoints"},
    {"dataset", "synth", "data source: synth or skl"},
    {"data_dir", "", "directory with train/ and test/ SKL subdirectories (dataset = skl)"},
    {"synth_train", "400", "generated training samples (dataset = synth)"},
    {"synth_test", "100", "generated test samples (dataset = synth)"},
    {"frames", "64", "frames per sample; files are padded/cropped to this"},
    {"data_seed", "7", "generator seed (dataset = synth)"},
};

bool known_key(const std::string& key) {
    for (const SchemaKey& s : kSchema) {
        if (key == s.name) return true;
    }
    return false;
}

template <typename Fn>
auto checked(const std::string& key, Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        throw ConfigError(key, e.what());
    }
}

void apply(RunConfig& config, const std::string& key, const std::string& value) {
    if (!known_key(key)) {
        throw ConfigError(key, "unknown key");
    }
    if (key == "template") {
        config.model.template_name = value;
    } else if (key == "num_classes") {
        config.model.num_classes = checked(key, [&] { return parse_uint(value); });
    } else if (key == "gvfe_out_channels") {
        config.model.gvfe_out_channels = checked(key, [&] { return parse_uint(value); });
    } else if (key == "gvfe_temporal_window") {
        config.model.gvfe_temporal_window = checked(key, [&] { return parse_uint(value); });
    } else if (key == "blocks") {
        auto list = checked(key, [&] { return parse_uint_list(value); });
        config.model.blocks.assign(list.begin(), list.end());
    } else if (key == "dhtcn_layers") {
        config.model.dhtcn_layers = checked(key, [&] { return parse_uint(value); });
    } else if (key == "dhtcn_temporal_window") {
        config.model.dhtcn_temporal_window = checked(key, [&] { return parse_uint(value); });
    } else if (key == "gvfe_relu") {
        config.model.gvfe_relu = checked(key, [&] { return parse_bool(value); });
    } else if (key == "gvfe_bn") {
        config.model.gvfe_bn = checked(key, [&] { return parse_bool(value); });
    } else if (key == "bias") {
        config.model.bias = checked(key, [&] { return parse_bool(value); });
    } else if (key == "seed") {
        config.model.seed = checked(key, [&] { return parse_uint(value); });
    } else if (key == "epochs") {
        config.train.epochs = checked(key, [&] { return parse_uint(value); });
    } else if (key == "batch_size") {
        config.train.batch_size = checked(key, [&] { return parse_uint(value); });
    } else if (key == "learning_rate") {
        config.train.learning_rate = checked(key, [&] { return parse_double(value); });
    } else if (key == "decay_epochs") {
        auto list = value.empty() ? std::vector<std::uint64_t>{}
                                  : checked(key, [&] { return parse_uint_list(value); });
        config.train.decay_epochs.assign(list.begin(), list.end());
    } else if (key == "decay_factor") {
        config.train.decay_factor = checked(key, [&] { return parse_double(value); });
    } else if (key == "momentum") {
        config.train.momentum = checked(key, [&] { return parse_double(value); });
    } else if (key == "weight_decay") {
        config.train.weight_decay = checked(key, [&] { return parse_double(value); });
    } else if (key == "train_seed") {
        config.train.seed = checked(key, [&] { return parse_uint(value); });
    } else if (key == "checkpoint_interval") {
        config.train.checkpoint_interval = checked(key, [&] { return parse_uint(value); });
    } else if (key == "out_dir") {
        config.train.out_dir = value;
    } else if (key == "dataset") {
        config.data.source = value;
    } else if (key == "data_dir") {
        config.data.data_dir = value;
    } else if (key == "synth_train") {
        config.data.synth_train = checked(key, [&] { return parse_uint(value); });
    } else if (key == "synth_test") {
        config.data.synth_test = checked(key, [&] { return parse_uint(value); });
    } else if (key == "frames") {
        config.data.frames = checked(key, [&] { return parse_uint(value); });
    } else if (key == "data_seed") {
        config.data.data_seed = checked(key, [&] { return parse_uint(value); });
    }
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::vector<std::string>& overrides) {
    RunConfig config;
    std::vector<KeyValue> entries;
    try {
        entries = parse_key_values(text);
    } catch (const std::exception& e) {
        throw ConfigError("<file>", e.what());
    }
    for (const std::string& item : overrides) {
        std::size_t eq = item.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(item, "override must look like key=value");
        }
        KeyValue kv;
        kv.key = trim(std::string_view(item).substr(0, eq));
        kv.value = trim(std::string_view(item).substr(eq + 1));
        entries.push_back(std::move(kv));
    }
    for (const KeyValue& kv : entries) {
        apply(config, kv.key, kv.value);
    }
    if (config.data.source != "synth" && config.data.source != "skl") {
        throw ConfigError("dataset", "must be 'synth' or 'skl', got '" + config.data.source + "'");
    }
    if (config.data.source == "skl" && config.data.data_dir.empty()) {
        throw ConfigError("data_dir", "required when dataset = skl");
    }
    if (config.model.blocks.empty()) {
        throw ConfigError("blocks", "must list at least one block");
    }
    if (config.train.epochs < 1) {
        throw ConfigError("epochs", "must be >= 1");
    }
    if (config.train.learning_rate <= 0.0) {
        throw ConfigError("learning_rate", "must be positive");
    }
    if (!has_template(config.model.template_name)) {
        throw ConfigError("template", "unknown template '" + config.model.template_name + "'");
    }
    return config;
}

std::string schema_help() {
    std::string out = "Config keys (key = value per line, '#' comments, lists comma separated):\n";
    for (const SchemaKey& s : kSchema) {
        out += "  ";
        out += s.name;
        out += " (default ";
        out += *s.fallback ? s.fallback : "<empty>";
        out += "): ";
        out += s.description;
        out += "\n";
    }
    return out;
}

Dataset build_dataset(const RunConfig& config) {
    if (config.data.source == "synth") {
        return make_synth_dataset(config.model.template_name, config.model.num_classes,
                                  config.data.synth_train, config.data.synth_test,
                                  config.data.frames, config.data.data_seed);
    }
    return load_skl_dataset(config.data.data_dir, config.model.num_classes, config.data.frames);
}

}  // namespace stgcn
