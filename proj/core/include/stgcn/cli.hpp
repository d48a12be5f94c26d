#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace stgcn::cli {

// Exit codes shared by every subcommand so CI can discriminate failures:
// 0 success, 1 verification failure, 2 usage/config/data error, 3 divergence.
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerificationFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDiverged = 3;

int cmd_train(const std::string& config_path, const std::vector<std::string>& overrides);

int cmd_eval(const std::string& checkpoint_path, const std::string& data_dir);

/// Empty config path builds the tiny reference model (chain3, blocks 4,4,
/// T=8, 2 classes). `inject_sign_fault` flips one analytic gradient, forcing
/// a reported failure; it exists for tests.
int cmd_gradcheck(const std::string& config_path, const std::vector<std::string>& overrides,
                  const std::string& inject_sign_fault);

int cmd_params(const std::string& config_path, const std::vector<std::string>& overrides);

struct SynthOptions {
    std::string out_dir;
    std::size_t count = 8;
    std::uint64_t seed = 7;
    std::string template_name = "chain7";
    std::size_t frames = 64;
    std::vector<std::size_t> classes = {0, 1, 2, 3};
    double sigma = 0.01;
};

int cmd_synth(const SynthOptions& options);

/// argv entry point; parses subcommands and dispatches.
int run(int argc, const char* const* argv);

}  // namespace stgcn::cli
