#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

// Runs the installed binary; every test here exercises the real executable.
CliResult run_cli(const std::string& args) {
    std::string command = std::string(STGCNKIT_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CliResult result;
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) {
        result.output.append(buf.data(), n);
    }
    int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

std::string demo_config(const std::string& out_dir) {
    return "# compact demo setup\n"
           "template = chain7\n"
           "num_classes = 4\n"
           "blocks = 8,8\n"
           "epochs = 2\n"
           "batch_size = 8\n"
           "synth_train = 16\n"
           "synth_test = 8\n"
           "frames = 32\n"
           "checkpoint_interval = 0\n"
           "out_dir = " +
           out_dir + "\n";
}

std::size_t count_lines_with(const std::string& text, const std::string& needle) {
    std::size_t count = 0;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.find(needle) != std::string::npos) ++count;
    }
    return count;
}

}  // namespace

TEST_CASE("params prints the default breakdown deterministically") {
    CliResult a = run_cli("params");
    REQUIRE(a.exit_code == 0);
    CHECK(a.output.find("param gvfe 5400") != std::string::npos);
    CHECK(a.output.find("param block0.sgcn 512") != std::string::npos);
    CliResult b = run_cli("params");
    CHECK(a.output == b.output);
}

TEST_CASE("params matches the hand-computed minimal total") {
    // chain3, one 4-channel block: 648 encoder + 32 spatial + 32 projection
    // + 304 temporal stack + 10 classifier.
    CliResult r = run_cli("params --set template=chain3 --set blocks=4 --set num_classes=2");
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("total 1026") != std::string::npos);
}

TEST_CASE("params rejects bad configs") {
    CHECK(run_cli("params --set blocks=").exit_code == 2);
    CHECK(run_cli("params --set nonsense=1").exit_code == 2);
    CliResult named = run_cli("params --set nonsense=1");
    CHECK(named.output.find("nonsense") != std::string::npos);
}

TEST_CASE("train runs from a config file and eval reproduces its accuracy") {
    fs::remove_all("cli_out");
    fs::create_directories("cli_out");
    write_file("cli_out/demo.cfg", demo_config("cli_out/run1"));

    CliResult train = run_cli("train --config cli_out/demo.cfg --set epochs=1");
    REQUIRE(train.exit_code == 0);
    CHECK(train.output.find("epochs 1") != std::string::npos);
    REQUIRE(fs::exists("cli_out/run1/report.csv"));
    REQUIRE(fs::exists("cli_out/run1/checkpoint_final.ckpt"));
    REQUIRE(fs::is_directory("cli_out/run1/test_set"));

    // One header plus one epoch row.
    std::ifstream report("cli_out/run1/report.csv");
    std::string header, row, extra;
    REQUIRE(static_cast<bool>(std::getline(report, header)));
    REQUIRE(static_cast<bool>(std::getline(report, row)));
    CHECK(!std::getline(report, extra));
    CHECK(header == "epoch,train_loss,train_acc,test_acc,seconds");

    // report row: epoch,train_loss,train_acc,test_acc,seconds
    std::size_t first = 0;
    std::vector<std::string> fields;
    std::istringstream row_in(row);
    std::string field;
    while (std::getline(row_in, field, ',')) fields.push_back(field);
    REQUIRE(fields.size() == 5);
    (void)first;

    CliResult eval = run_cli(
        "eval --checkpoint cli_out/run1/checkpoint_final.ckpt --data cli_out/run1/test_set");
    REQUIRE(eval.exit_code == 0);
    CHECK(eval.output.find("accuracy " + fields[3] + "\n") != std::string::npos);
    CHECK(count_lines_with(eval.output, "class ") == 4);
}

TEST_CASE("train maps config problems to exit 2") {
    CHECK(run_cli("train --config cli_out/missing.cfg").exit_code == 2);
    write_file("cli_out/bad.cfg", "epochz = 3\n");
    CliResult bad = run_cli("train --config cli_out/bad.cfg");
    CHECK(bad.exit_code == 2);
    CHECK(bad.output.find("epochz") != std::string::npos);
}

TEST_CASE("train consumes SKL directories") {
    fs::remove_all("cli_out/skl_data");
    CliResult t = run_cli(
        "synth --out cli_out/skl_data/train --count 16 --seed 21 --template chain3 --frames 24");
    REQUIRE(t.exit_code == 0);
    CliResult e = run_cli(
        "synth --out cli_out/skl_data/test --count 8 --seed 22 --template chain3 --frames 24");
    REQUIRE(e.exit_code == 0);
    write_file("cli_out/skl.cfg",
               "template = chain3\nblocks = 8\nepochs = 1\ndataset = skl\n"
               "data_dir = cli_out/skl_data\nframes = 24\ncheckpoint_interval = 0\n"
               "out_dir = cli_out/skl_run\n");
    CliResult train = run_cli("train --config cli_out/skl.cfg");
    REQUIRE(train.exit_code == 0);
    CHECK(fs::exists("cli_out/skl_run/report.csv"));

    // dataset = skl without a directory is a config error.
    write_file("cli_out/skl_bad.cfg", "dataset = skl\n");
    CliResult bad = run_cli("train --config cli_out/skl_bad.cfg");
    CHECK(bad.exit_code == 2);
    CHECK(bad.output.find("data_dir") != std::string::npos);
}

TEST_CASE("divergence maps to exit 3") {
    write_file("cli_out/diverge.cfg",
               "template = chain7\nblocks = 8\nepochs = 3\nsynth_train = 16\nsynth_test = 8\n"
               "frames = 32\ncheckpoint_interval = 1\ndecay_epochs = 1\ndecay_factor = 1e160\n"
               "out_dir = cli_out/diverge_run\n");
    CliResult r = run_cli("train --config cli_out/diverge.cfg");
    CHECK(r.exit_code == 3);
    CHECK(r.output.find("checkpoint_1.ckpt") != std::string::npos);
}

TEST_CASE("block list overrides change the built model") {
    CliResult r = run_cli("params --set blocks=64,128");
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("param block1.sgcn 8192") != std::string::npos);  // 64 * 128
    CHECK(r.output.find("block2") == std::string::npos);
}

TEST_CASE("eval rejects broken inputs") {
    fs::create_directories("cli_out/empty");
    CHECK(run_cli("eval --checkpoint cli_out/run1/checkpoint_final.ckpt --data cli_out/empty")
              .exit_code == 2);

    // Corrupt the checkpoint header.
    fs::copy_file("cli_out/run1/checkpoint_final.ckpt", "cli_out/broken.ckpt",
                  fs::copy_options::overwrite_existing);
    {
        std::fstream f("cli_out/broken.ckpt", std::ios::in | std::ios::out | std::ios::binary);
        f.write("XXXXXXXX", 8);
    }
    CHECK(run_cli("eval --checkpoint cli_out/broken.ckpt --data cli_out/run1/test_set")
              .exit_code == 2);

    // Template mismatch between the checkpoint and the samples.
    fs::create_directories("cli_out/mismatch");
    CliResult synth = run_cli(
        "synth --out cli_out/mismatch --count 2 --template chain3 --frames 32 --classes 0,1");
    REQUIRE(synth.exit_code == 0);
    CHECK(run_cli("eval --checkpoint cli_out/run1/checkpoint_final.ckpt --data cli_out/mismatch")
              .exit_code == 2);
}

TEST_CASE("gradcheck passes on the tiny reference model") {
    CliResult r = run_cli("gradcheck");
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("result PASS") != std::string::npos);
    // Every module appears exactly once.
    for (const char* module : {"module gvfe ", "module block0 ", "module block1 ",
                               "module classifier ", "module input "}) {
        CHECK(count_lines_with(r.output, module) == 1);
    }
}

TEST_CASE("gradcheck reports injected faults") {
    CliResult r = run_cli("gradcheck --inject-sign-fault block0.sgcn.weight");
    REQUIRE(r.exit_code == 1);
    CHECK(r.output.find("result FAIL") != std::string::npos);
    CHECK(r.output.find("offending block0.sgcn.weight") != std::string::npos);
}

TEST_CASE("synth balances classes and is byte-deterministic") {
    fs::remove_all("cli_out/synth_a");
    fs::remove_all("cli_out/synth_b");
    CliResult a = run_cli("synth --out cli_out/synth_a --count 8 --seed 5 --frames 32");
    REQUIRE(a.exit_code == 0);
    CHECK(a.output.find("wrote 8 files") != std::string::npos);
    std::size_t per_class[4] = {0, 0, 0, 0};
    for (const auto& entry : fs::directory_iterator("cli_out/synth_a")) {
        std::string name = entry.path().filename().string();
        REQUIRE(name.rfind("synth_c", 0) == 0);
        ++per_class[name[7] - '0'];
    }
    for (std::size_t k = 0; k < 4; ++k) CHECK(per_class[k] == 2);

    CliResult b = run_cli("synth --out cli_out/synth_b --count 8 --seed 5 --frames 32");
    REQUIRE(b.exit_code == 0);
    for (const auto& entry : fs::directory_iterator("cli_out/synth_a")) {
        fs::path other = fs::path("cli_out/synth_b") / entry.path().filename();
        REQUIRE(fs::exists(other));
        std::ifstream f1(entry.path(), std::ios::binary), f2(other, std::ios::binary);
        std::stringstream s1, s2;
        s1 << f1.rdbuf();
        s2 << f2.rdbuf();
        REQUIRE(s1.str() == s2.str());
    }
}

TEST_CASE("synth assigns remainders to the lowest class indices") {
    fs::remove_all("cli_out/synth_c");
    CliResult r = run_cli("synth --out cli_out/synth_c --count 6 --seed 5 --frames 32");
    REQUIRE(r.exit_code == 0);
    std::size_t per_class[4] = {0, 0, 0, 0};
    for (const auto& entry : fs::directory_iterator("cli_out/synth_c")) {
        ++per_class[entry.path().filename().string()[7] - '0'];
    }
    CHECK(per_class[0] == 2);
    CHECK(per_class[1] == 2);
    CHECK(per_class[2] == 1);
    CHECK(per_class[3] == 1);
}

TEST_CASE("help exits zero and documents the schema") {
    for (const char* sub : {"train", "eval", "gradcheck", "params", "synth"}) {
        CliResult r = run_cli(std::string(sub) + " --help");
        REQUIRE(r.exit_code == 0);
    }
    CliResult train_help = run_cli("train --help");
    for (const char* key : {"epochs", "blocks", "learning_rate", "dataset", "frames"}) {
        CHECK(train_help.output.find(key) != std::string::npos);
    }
    CHECK(run_cli("--help").exit_code == 0);
    CHECK(run_cli("bogus-subcommand").exit_code == 2);
    CHECK(run_cli("").exit_code == 2);
}
