// Copyright 2026 The olce authors
// Confusion matrix, the six evaluation indexes, and multi-run summaries.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "olce/errors.hpp"

namespace olce {

/// K x K counts, rows = true class, cols = predicted class.
struct ConfusionMatrix {
    int k = 0;
    std::vector<long long> counts;   // row-major
    long long n = 0;

    long long& at(int t, int p) { return counts[static_cast<size_t>(t) * k + p]; }
    long long at(int t, int p) const { return counts[static_cast<size_t>(t) * k + p]; }
    long long row_sum(int t) const;
    long long col_sum(int p) const;
};

ConfusionMatrix confusion(const std::vector<int>& true_labels,
                          const std::vector<int>& predicted_labels, int k);

struct EvalReport {
    double accuracy        = 0.0;
    double precision_macro = 0.0;
    double recall_macro    = 0.0;
    double f1_macro        = 0.0;
    double kappa           = 0.0;
    double hamming_loss    = 0.0;
    /// Classes whose precision or recall denominator was empty
    /// (their contribution is taken as 0).
    int zero_denominator_classes = 0;
};

/// Accuracy = trace/n; macro precision/recall/F1 with the 0-on-empty
/// convention; chance-corrected agreement from the marginals; Hamming
/// loss = 1 - accuracy.
EvalReport evaluate(const ConfusionMatrix& cm);

struct MetricStats {
    double max = 0.0, min = 0.0, ave = 0.0, var = 0.0;
};

/// Per-run reports plus Max/Min/Ave/Var per metric. Variance follows the
/// sample convention (divide by R-1; 0 for a single run).
struct RunTable {
    std::vector<EvalReport> runs;
    MetricStats accuracy, precision_macro, recall_macro, f1_macro, kappa, hamming_loss;
};

RunTable aggregate(const std::vector<EvalReport>& reports);

/// Max/Min/Ave/Var of a raw value series under the same conventions.
MetricStats summarize_series(const std::vector<double>& values);

nlohmann::ordered_json to_json(const EvalReport& r);
nlohmann::ordered_json to_json(const RunTable& t);
nlohmann::ordered_json to_json(const ConfusionMatrix& cm);

/// Aligned text table: one row per run, metric columns, then
/// Max/Min/Ave/Var rows.
std::string to_text_table(const RunTable& t);

} // namespace olce
