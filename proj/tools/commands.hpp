#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "egoact/net.hpp"
#include "egoact/train.hpp"

namespace egoact::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kRuntimeFailure = 1;
inline constexpr int kInvalidInput = 2;

inline constexpr int kTrainConfigFormatVersion = 1;

// Parsed training config file.
struct TrainFileConfig {
    std::filesystem::path manifest;
    nlohmann::json net_overrides = nlohmann::json::object();
    TrainConfig train;
    std::string train_split = "train";
    std::string val_split = "val";
    std::string test_split = "test";
};

TrainFileConfig load_train_config(const std::filesystem::path& path);
nlohmann::json to_json(const TrainFileConfig& cfg);

struct TrainArgs {
    std::filesystem::path config;
    std::optional<std::uint64_t> seed;
    std::filesystem::path out;
    bool deterministic = false;
    bool resume = false;
};

struct EvalArgs {
    std::filesystem::path checkpoint;
    std::filesystem::path manifest;
    std::string split = "test";
    std::string pose_source = "ground_truth";
    std::optional<std::filesystem::path> report;
};

struct AblateArgs {
    std::filesystem::path checkpoint;
    std::filesystem::path manifest;
    std::string split = "test";
    std::string pose_source = "ground_truth";
    // Each entry is one configuration: a comma-separated list of left/right/object.
    std::vector<std::string> masks;
    std::optional<std::filesystem::path> report;
};

struct BenchArgs {
    std::filesystem::path checkpoint;
    int trials = 1000;
    int warmup = 50;
    std::uint64_t seed = 0;
    std::optional<std::filesystem::path> report;
};

struct ConvertArgs {
    std::string layout;
    std::filesystem::path src;
    std::filesystem::path out;
};

struct SynthArgs {
    std::optional<std::filesystem::path> spec;
    std::filesystem::path out;
};

struct DecodeArgs {
    std::filesystem::path heatmaps;
    int image_width = 1280;
    int image_height = 720;
};

int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);
int cmd_ablate(const AblateArgs& args, std::ostream& out, std::ostream& err);
int cmd_bench(const BenchArgs& args, std::ostream& out, std::ostream& err);
int cmd_convert(const ConvertArgs& args, std::ostream& out, std::ostream& err);
int cmd_synth(const SynthArgs& args, std::ostream& out, std::ostream& err);
int cmd_decode(const DecodeArgs& args, std::ostream& out, std::ostream& err);

struct AblationRow {
    std::string name;
    bool left = true;
    bool right = true;
    bool object = true;
    double accuracy_percent = 0.0;
};

std::string render_ablation_table(const std::vector<AblationRow>& rows);

struct LatencyStats {
    std::size_t n = 0;
    double mean_ms = 0.0;
    double std_ms = 0.0;
    double min_ms = 0.0;
    double max_ms = 0.0;
};

// Times `trials` eval-mode forwards of one sequence after `warmup` untimed ones.
LatencyStats measure_forward_latency(const ClassifierParams<float>& params, int trials, int warmup,
                                     std::uint64_t seed);

// Parses argv and dispatches to a command.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace egoact::cli
