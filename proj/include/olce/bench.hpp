// Copyright 2026 The olce authors
// Repeated-run benchmark: per run, one stratified re-split shared by all
// models, fresh fits, test-split evaluation; per-model summaries plus a
// combined accuracy comparison table.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "olce/baselines.hpp"
#include "olce/metrics.hpp"
#include "olce/signalio.hpp"
#include "olce/synthgen.hpp"

namespace olce {

struct BenchConfig {
    std::string manifest;      // path; empty when preset is used
    std::string preset;        // synth preset name; empty when manifest is used
    std::vector<std::string> models = known_model_names();
    int runs = 10;
    uint64_t base_seed = 0;
    double test_fraction = 0.25;
    std::string out_dir;       // empty: no files written
    int jobs = 0;              // 0: hardware concurrency

    TrainConfig olce;
    MlpConfig mlp;
    CnnSvmConfig cnn_svm;

    void validate() const;
    nlohmann::ordered_json to_json() const;
};

struct RunOutcome {
    bool ok = false;
    EvalReport report;
    std::string error; // set when !ok
};

struct ModelBenchResult {
    std::string model;
    std::vector<RunOutcome> outcomes;       // one per run
    std::optional<RunTable> table;          // over successful runs
};

struct BenchResult {
    std::vector<ModelBenchResult> models;
    std::vector<std::filesystem::path> written;

    const ModelBenchResult& for_model(const std::string& name) const;
};

/// Loads or generates the dataset, normalizes it, and runs the protocol.
/// Deterministic for a fixed config, independent of jobs.
BenchResult run_bench(const BenchConfig& cfg);

/// Same, against an already-normalized dataset (no file I/O for input).
BenchResult run_bench(const BenchConfig& cfg, const Dataset& normalized);

/// Combined text table: one row per model, per-run accuracies plus
/// Max/Min/Ave/Var columns.
std::string comparison_table(const BenchResult& result);

} // namespace olce
