#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "stgcn/model.hpp"
#include "stgcn/trainer.hpp"

namespace stgcn {

/// Where training data comes from: the built-in generator or a directory of
/// SKL files with train/ and test/ subdirectories.
struct DataConfig {
    std::string source = "synth";  // "synth" or "skl"
    std::string data_dir;
    std::size_t synth_train = 400;
    std::size_t synth_test = 100;
    std::size_t frames = 64;
    std::uint64_t data_seed = 7;
};

struct RunConfig {
    ModelConfig model;
    TrainConfig train;
    DataConfig data;
};

struct ConfigError : std::runtime_error {
    ConfigError(std::string key_name, const std::string& message)
        : std::runtime_error("config key '" + key_name + "': " + message),
          key(std::move(key_name)) {}
    std::string key;
};

/// Parses "key = value" config text plus "key=value" command-line overrides
/// (applied last). Every key is validated against the schema; unknown keys
/// are rejected.
RunConfig parse_run_config(const std::string& text, const std::vector<std::string>& overrides);

/// One line per schema key: name, default, description. Embedded in --help.
std::string schema_help();

Dataset build_dataset(const RunConfig& config);

}  // namespace stgcn
