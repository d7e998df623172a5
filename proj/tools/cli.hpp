#pragma once

#include "rkhs_dagma/rkhs_dagma.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rkhs_dagma::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kDataError = 2,
    kOptimizationError = 3,
    kNotDag = 4,
};

/// Runs one subcommand; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Thread count from RKHS_DAGMA_THREADS (0 = all cores), or `fallback`.
unsigned threads_from_env(unsigned fallback = 1);

struct RunManifest {
    std::string command;
    json config;
    std::optional<std::uint64_t> seed;
    json inputs = json::object();
    json outputs = json::array();
    double duration_seconds = 0.0;

    [[nodiscard]] json to_json() const;
    void write(const fs::path& path) const;
};

json to_json(const DagmaConfig& cfg);
json to_json(const ObjectiveReport& report);
json to_json(const SemSpec& spec);

/// Fitted model with the column transform applied before fitting.
struct SavedModel {
    ModelParams theta;
    double gamma = 0.0;
    Vector column_mean;
    Vector column_scale;
};

json model_to_json(const DiscoveryResult& result);
SavedModel model_from_json(const json& j);

struct SimulateOptions {
    SemSpec spec;
    fs::path out_dir;
};
/// data.csv, truth_dag.csv, manifest.json.
SimulatedDataset cmd_simulate(const SimulateOptions& opt);

struct DiscoverOptions {
    fs::path data;
    fs::path out_dir;
    DagmaConfig cfg;
};
/// W_raw.csv, W_hat.csv, graph.csv, trace.json, model.json, manifest.json.
DiscoveryResult cmd_discover(const DiscoverOptions& opt);

struct EvaluateOptions {
    fs::path graph;
    fs::path truth;
    fs::path out_dir;  ///< manifest.json is written only when set
};
json cmd_evaluate(const EvaluateOptions& opt);

struct PairsOptions {
    fs::path corpus;
    std::string meta = "pairmeta.txt";
    DagmaConfig cfg;
    unsigned workers = 1;
    fs::path out_dir;  ///< report.json and manifest.json when set
};

struct PairDecision {
    std::string id;
    Direction truth = Direction::AtoB;
    Direction decided = Direction::Undecided;
    bool tiebreak = false;
    double weight = 1.0;
    double w_ab = 0.0;
    double w_ba = 0.0;
};

struct PairsReport {
    std::vector<PairDecision> decisions;
    std::vector<std::string> skipped;
    double accuracy = 0.0;
    double weighted_accuracy = 0.0;

    [[nodiscard]] json to_json() const;
};

/// Corpus layout: a metadata file with lines
///   id cause_first cause_last effect_first effect_last [weight]
/// (1-indexed columns) and one data file pair<id>.txt per entry.
/// Entries whose cause or effect spans several columns are skipped.
PairsReport cmd_pairs(const PairsOptions& opt, std::ostream& log);

struct ToyplotOptions {
    fs::path data;
    fs::path model;
    fs::path out;
    Index points = 200;
};
/// Columns x, f_hat: the fitted function of the second variable on an
/// evenly spaced grid spanning the first variable's sample range.
Matrix cmd_toyplot(const ToyplotOptions& opt);

}  // namespace rkhs_dagma::cli
