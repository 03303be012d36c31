#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "aalf/forecasters.hpp"
#include "aalf/ingest.hpp"

namespace aalf {

/// A stage input is missing; the message names the command that produces it.
struct MissingArtifact : std::runtime_error { using std::runtime_error::runtime_error; };
struct ConfigError : std::runtime_error { using std::runtime_error::runtime_error; };

struct DatasetConfig {
    std::string path;
    std::string format = "tsf";  // tsf | csv_long | csv_wide
    std::string name;            // optional override
    int lag = 0;                 // 0 = derive from frequency
    std::string frequency;       // optional override token
    int horizon = 0;             // 0 = keep the file's value
};

struct SplitConfig {
    double train_fraction = 0.8;
    double val_fraction = 0.1;
};

struct ArConfig {
    bool intercept = false;
    double ridge = 1e-8;
};

struct SelectorConfig {
    std::string kind = "rfu";  // classifier driving the AALF selection
    std::vector<std::string> classifiers{"rnd", "lr", "rf", "rfu"};
    bool pooled = false;       // one model over all series instead of per series
    int rf_trees = 128;
    int rfu_members = 10;
    double threshold = 0.5;
    int logistic_iterations = 500;
    double logistic_lr = 1.0;
    double logistic_l2 = 1e-4;
};

struct ExperimentConfig {
    DatasetConfig dataset;
    SplitConfig split;
    bool standardize = true;
    ArConfig ar;
    TrainConfig mlp;        // mlp.seed is ignored; streams derive from seed below
    std::string g_import;   // external g predictions CSV; empty = train the MLP
    std::vector<double> p_grid{0.5, 0.6, 0.7, 0.8, 0.9, 0.95};
    int oracle_samples = 100;
    SelectorConfig selector;
    std::uint64_t seed = 42;
    std::string out = "runs/out";
    int threads = 1;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical JSON of the semantically meaningful fields (out dir and thread
/// count excluded); the run identity.
std::string semantic_config_json(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);

/// Runs fn(0..count-1) on a worker pool. Tasks must be independent; the
/// first thrown exception is rethrown after all workers join.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

void cmd_ingest(const ExperimentConfig& cfg);
void cmd_train_base(const ExperimentConfig& cfg);
void cmd_oracle(const ExperimentConfig& cfg);
void cmd_fit_selector(const ExperimentConfig& cfg);
void cmd_evaluate(const ExperimentConfig& cfg);
void cmd_report(const ExperimentConfig& cfg);

}  // namespace aalf
