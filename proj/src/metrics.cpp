// Copyright 2026 The olce authors
//
// Licensed under the Apache License, Version 2.0

#include "olce/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace olce {

long long ConfusionMatrix::row_sum(int t) const {
    long long s = 0;
    for (int p = 0; p < k; ++p) s += at(t, p);
    return s;
}

long long ConfusionMatrix::col_sum(int p) const {
    long long s = 0;
    for (int t = 0; t < k; ++t) s += at(t, p);
    return s;
}

ConfusionMatrix confusion(const std::vector<int>& true_labels,
                          const std::vector<int>& predicted_labels, int k) {
    if (true_labels.size() != predicted_labels.size())
        throw DimensionError("confusion: label lists differ in length: " +
                             std::to_string(true_labels.size()) + " vs " +
                             std::to_string(predicted_labels.size()));
    if (k <= 0)
        throw ConfigError("confusion: k must be positive");
    ConfusionMatrix cm;
    cm.k = k;
    cm.counts.assign(static_cast<size_t>(k) * k, 0);
    for (size_t i = 0; i < true_labels.size(); ++i) {
        int t = true_labels[i], p = predicted_labels[i];
        if (t < 0 || t >= k || p < 0 || p >= k)
            throw DataError("confusion: label out of range at index " + std::to_string(i) +
                            " (true " + std::to_string(t) + ", predicted " + std::to_string(p) +
                            ", k " + std::to_string(k) + ")");
        ++cm.at(t, p);
        ++cm.n;
    }
    return cm;
}

EvalReport evaluate(const ConfusionMatrix& cm) {
    if (cm.n <= 0)
        throw DataError("evaluate: empty confusion matrix");

    EvalReport r;
    long long diag = 0;
    for (int c = 0; c < cm.k; ++c) diag += cm.at(c, c);
    r.accuracy = static_cast<double>(diag) / static_cast<double>(cm.n);

    double prec_sum = 0.0, rec_sum = 0.0, f1_sum = 0.0;
    long long pe_num = 0; // sum of row_sum * col_sum, exact in integers
    for (int c = 0; c < cm.k; ++c) {
        const long long rs = cm.row_sum(c);
        const long long cs = cm.col_sum(c);
        pe_num += rs * cs;
        double prec = 0.0, rec = 0.0;
        if (cs > 0) prec = static_cast<double>(cm.at(c, c)) / static_cast<double>(cs);
        else ++r.zero_denominator_classes;
        if (rs > 0) rec = static_cast<double>(cm.at(c, c)) / static_cast<double>(rs);
        else ++r.zero_denominator_classes;
        prec_sum += prec;
        rec_sum += rec;
        if (prec + rec > 0.0) f1_sum += 2.0 * prec * rec / (prec + rec);
    }
    r.precision_macro = prec_sum / cm.k;
    r.recall_macro    = rec_sum / cm.k;
    r.f1_macro        = f1_sum / cm.k;

    if (pe_num == cm.n * cm.n) {
        // All marginal mass on a single class. Only reachable with a
        // perfect single-cell diagonal, where agreement is total.
        if (diag != cm.n)
            throw DataError("evaluate: degenerate marginals (chance agreement 1) with "
                            "imperfect predictions");
        r.kappa = 1.0;
    } else {
        const double pe = static_cast<double>(pe_num) /
                          (static_cast<double>(cm.n) * static_cast<double>(cm.n));
        r.kappa = (r.accuracy - pe) / (1.0 - pe);
    }

    r.hamming_loss = 1.0 - r.accuracy;
    return r;
}

MetricStats summarize_series(const std::vector<double>& values) {
    if (values.empty())
        throw ConfigError("summarize_series: empty series");
    MetricStats s;
    s.max = *std::max_element(values.begin(), values.end());
    s.min = *std::min_element(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.ave = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double sq = 0.0;
        for (double v : values) sq += (v - s.ave) * (v - s.ave);
        s.var = sq / static_cast<double>(values.size() - 1);
    }
    return s;
}

RunTable aggregate(const std::vector<EvalReport>& reports) {
    if (reports.empty())
        throw ConfigError("aggregate: need at least one report");
    RunTable t;
    t.runs = reports;
    auto collect = [&](double EvalReport::* field) {
        std::vector<double> v;
        v.reserve(reports.size());
        for (const auto& r : reports) v.push_back(r.*field);
        return summarize_series(v);
    };
    t.accuracy        = collect(&EvalReport::accuracy);
    t.precision_macro = collect(&EvalReport::precision_macro);
    t.recall_macro    = collect(&EvalReport::recall_macro);
    t.f1_macro        = collect(&EvalReport::f1_macro);
    t.kappa           = collect(&EvalReport::kappa);
    t.hamming_loss    = collect(&EvalReport::hamming_loss);
    return t;
}

nlohmann::ordered_json to_json(const EvalReport& r) {
    return {{"accuracy", r.accuracy},
            {"precision_macro", r.precision_macro},
            {"recall_macro", r.recall_macro},
            {"f1_macro", r.f1_macro},
            {"kappa", r.kappa},
            {"hamming_loss", r.hamming_loss},
            {"zero_denominator_classes", r.zero_denominator_classes}};
}

nlohmann::ordered_json to_json(const ConfusionMatrix& cm) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (int t = 0; t < cm.k; ++t) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (int p = 0; p < cm.k; ++p) row.push_back(cm.at(t, p));
        rows.push_back(row);
    }
    return {{"k", cm.k}, {"n", cm.n}, {"counts", rows}};
}

namespace {

nlohmann::ordered_json stats_json(const MetricStats& s) {
    return {{"max", s.max}, {"min", s.min}, {"ave", s.ave}, {"var", s.var}};
}

} // namespace

nlohmann::ordered_json to_json(const RunTable& t) {
    nlohmann::ordered_json runs = nlohmann::ordered_json::array();
    for (const auto& r : t.runs) runs.push_back(to_json(r));
    return {{"variance_convention", "sample"},
            {"runs", runs},
            {"accuracy", stats_json(t.accuracy)},
            {"precision_macro", stats_json(t.precision_macro)},
            {"recall_macro", stats_json(t.recall_macro)},
            {"f1_macro", stats_json(t.f1_macro)},
            {"kappa", stats_json(t.kappa)},
            {"hamming_loss", stats_json(t.hamming_loss)}};
}

std::string to_text_table(const RunTable& t) {
    std::ostringstream os;
    char buf[64];
    auto cell = [&](double v) {
        std::snprintf(buf, sizeof buf, "%8.4f", v);
        return std::string(buf);
    };
    os << "run   accuracy  precision  recall    f1        kappa     hamming\n";
    for (size_t i = 0; i < t.runs.size(); ++i) {
        const auto& r = t.runs[i];
        std::snprintf(buf, sizeof buf, "%-5zu", i + 1);
        os << buf << cell(r.accuracy) << "  " << cell(r.precision_macro) << " "
           << cell(r.recall_macro) << "  " << cell(r.f1_macro) << "  " << cell(r.kappa)
           << "  " << cell(r.hamming_loss) << "\n";
    }
    auto stat_row = [&](const char* name, double MetricStats::* field) {
        std::snprintf(buf, sizeof buf, "%-5s", name);
        os << buf << cell(t.accuracy.*field) << "  " << cell(t.precision_macro.*field) << " "
           << cell(t.recall_macro.*field) << "  " << cell(t.f1_macro.*field) << "  "
           << cell(t.kappa.*field) << "  " << cell(t.hamming_loss.*field) << "\n";
    };
    stat_row("max", &MetricStats::max);
    stat_row("min", &MetricStats::min);
    stat_row("ave", &MetricStats::ave);
    stat_row("var", &MetricStats::var);
    return os.str();
}

} // namespace olce
