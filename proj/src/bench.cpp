// Copyright 2026 The olce authors
//
// Licensed under the Apache License, Version 2.0

#include "olce/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <thread>

namespace olce {

void BenchConfig::validate() const {
    if (runs < 1)
        throw ConfigError("bench: runs must be >= 1");
    if (models.empty())
        throw ConfigError("bench: model list must not be empty");
    if (manifest.empty() == preset.empty())
        throw ConfigError("bench: exactly one of manifest or preset is required");
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ConfigError("bench: test_fraction must be in (0, 1)");
    for (const auto& m : models) {
        const auto known = known_model_names();
        if (std::find(known.begin(), known.end(), m) == known.end()) {
            std::string valid;
            for (const auto& n : known) valid += (valid.empty() ? "" : ", ") + n;
            throw ConfigError("bench: unknown model '" + m + "' (valid models: " + valid + ")");
        }
    }
}

nlohmann::ordered_json BenchConfig::to_json() const {
    return {{"manifest", manifest},
            {"preset", preset},
            {"models", models},
            {"runs", runs},
            {"seed", base_seed},
            {"test_fraction", test_fraction},
            {"out", out_dir},
            {"jobs", jobs},
            {"epochs", olce.epochs},
            {"batch_size", olce.batch_size},
            {"lr", olce.lr},
            {"lambda_recon", olce.lambda_recon},
            {"mlp_epochs", mlp.epochs},
            {"cnn_epochs", cnn_svm.cnn_epochs},
            {"svm_epochs", cnn_svm.svm_epochs}};
}

const ModelBenchResult& BenchResult::for_model(const std::string& name) const {
    for (const auto& m : models)
        if (m.model == name) return m;
    throw ConfigError("bench result has no model '" + name + "'");
}

namespace {

// Stable per-model salt so run seeds do not depend on the model subset.
uint64_t model_salt(const std::string& name) {
    uint64_t h = 1469598103934665603ULL;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out)
            throw IoError("cannot write: " + tmp);
        out << text;
    }
    std::filesystem::rename(tmp, path);
}

} // namespace

BenchResult run_bench(const BenchConfig& cfg, const Dataset& normalized) {
    cfg.validate();

    // One split per run, shared by every model in that run.
    std::vector<SplitIndices> splits(cfg.runs);
    for (int r = 0; r < cfg.runs; ++r)
        splits[r] = *stratified_split(normalized, cfg.test_fraction,
                                      cfg.base_seed + static_cast<uint64_t>(r))
                         .split;

    BenchResult result;
    result.models.resize(cfg.models.size());
    for (size_t m = 0; m < cfg.models.size(); ++m) {
        result.models[m].model = cfg.models[m];
        result.models[m].outcomes.resize(cfg.runs);
    }

    struct Task {
        size_t model_idx;
        int run;
    };
    std::vector<Task> tasks;
    for (size_t m = 0; m < cfg.models.size(); ++m)
        for (int r = 0; r < cfg.runs; ++r)
            tasks.push_back({m, r});

    auto execute = [&](const Task& task) {
        RunOutcome& out = result.models[task.model_idx].outcomes[task.run];
        try {
            Dataset ds = normalized;
            ds.split = splits[task.run];
            const uint64_t seed =
                Rng::derive(cfg.base_seed + static_cast<uint64_t>(task.run),
                            model_salt(cfg.models[task.model_idx]));
            auto clf = make_classifier(cfg.models[task.model_idx], seed, cfg.olce,
                                       cfg.mlp, cfg.cnn_svm);
            clf->fit(ds);

            std::vector<int> truth, pred;
            truth.reserve(ds.split->test.size());
            for (int i : ds.split->test) {
                truth.push_back(ds.samples[i].label);
                pred.push_back(clf->predict(ds.samples[i]));
            }
            out.report = evaluate(confusion(truth, pred, ds.num_classes));
            out.ok = true;
        } catch (const std::exception& e) {
            out.ok = false;
            out.error = e.what();
        }
    };

    int jobs = cfg.jobs > 0 ? cfg.jobs
                            : static_cast<int>(std::thread::hardware_concurrency());
    jobs = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
    if (jobs == 1) {
        for (const auto& t : tasks) execute(t);
    } else {
        // Tasks are independent; results land in preallocated slots, so
        // the outcome does not depend on scheduling.
        std::atomic<size_t> next{0};
        std::vector<std::thread> workers;
        workers.reserve(jobs);
        for (int w = 0; w < jobs; ++w)
            workers.emplace_back([&] {
                while (true) {
                    const size_t i = next.fetch_add(1);
                    if (i >= tasks.size()) return;
                    execute(tasks[i]);
                }
            });
        for (auto& w : workers) w.join();
    }

    for (auto& m : result.models) {
        std::vector<EvalReport> ok_reports;
        for (const auto& o : m.outcomes)
            if (o.ok) ok_reports.push_back(o.report);
        if (!ok_reports.empty())
            m.table = aggregate(ok_reports);
    }

    if (!cfg.out_dir.empty()) {
        std::filesystem::path dir(cfg.out_dir);
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec)
            throw IoError("cannot create output dir: " + dir.string() + " (" + ec.message() +
                          ")");
        for (const auto& m : result.models) {
            nlohmann::ordered_json j{{"model", m.model}, {"config", cfg.to_json()}};
            nlohmann::ordered_json runs = nlohmann::ordered_json::array();
            for (const auto& o : m.outcomes) {
                if (o.ok)
                    runs.push_back({{"status", "ok"}, {"report", to_json(o.report)}});
                else
                    runs.push_back({{"status", "failed"}, {"error", o.error}});
            }
            j["runs"] = runs;
            j["summary"] = m.table ? to_json(*m.table) : nlohmann::ordered_json();
            const auto jpath = dir / ("run_table_" + m.model + ".json");
            write_text_atomic(jpath, j.dump(2) + "\n");
            result.written.push_back(jpath);
            if (m.table) {
                const auto tpath = dir / ("run_table_" + m.model + ".txt");
                write_text_atomic(tpath, to_text_table(*m.table));
                result.written.push_back(tpath);
            }
        }
        nlohmann::ordered_json cmp{{"config", cfg.to_json()}};
        nlohmann::ordered_json per_model = nlohmann::ordered_json::array();
        for (const auto& m : result.models) {
            nlohmann::ordered_json accs = nlohmann::ordered_json::array();
            for (const auto& o : m.outcomes)
                accs.push_back(o.ok ? nlohmann::ordered_json(o.report.accuracy)
                                    : nlohmann::ordered_json());
            nlohmann::ordered_json entry{{"model", m.model}, {"accuracy", accs}};
            if (m.table)
                entry["stats"] = {{"max", m.table->accuracy.max},
                                  {"min", m.table->accuracy.min},
                                  {"ave", m.table->accuracy.ave},
                                  {"var", m.table->accuracy.var}};
            per_model.push_back(entry);
        }
        cmp["models"] = per_model;
        const auto cpath = dir / "comparison.json";
        write_text_atomic(cpath, cmp.dump(2) + "\n");
        result.written.push_back(cpath);
        const auto ctxt = dir / "comparison.txt";
        write_text_atomic(ctxt, comparison_table(result));
        result.written.push_back(ctxt);
    }
    return result;
}

BenchResult run_bench(const BenchConfig& cfg) {
    cfg.validate();
    Dataset ds;
    if (!cfg.manifest.empty())
        ds = load_manifest(cfg.manifest);
    else
        ds = generate(synth_preset(cfg.preset));
    return run_bench(cfg, normalize_dataset(std::move(ds)));
}

std::string comparison_table(const BenchResult& result) {
    std::string out;
    char buf[64];
    size_t runs = 0;
    for (const auto& m : result.models) runs = std::max(runs, m.outcomes.size());

    std::snprintf(buf, sizeof buf, "%-9s", "model");
    out += buf;
    for (size_t r = 0; r < runs; ++r) {
        std::snprintf(buf, sizeof buf, " %7zu", r + 1);
        out += buf;
    }
    out += "     max     min     ave     var\n";
    for (const auto& m : result.models) {
        std::snprintf(buf, sizeof buf, "%-9s", m.model.c_str());
        out += buf;
        for (const auto& o : m.outcomes) {
            if (o.ok)
                std::snprintf(buf, sizeof buf, " %7.4f", o.report.accuracy);
            else
                std::snprintf(buf, sizeof buf, " %7s", "failed");
            out += buf;
        }
        if (m.table) {
            std::snprintf(buf, sizeof buf, " %7.4f %7.4f %7.4f %7.4f",
                          m.table->accuracy.max, m.table->accuracy.min,
                          m.table->accuracy.ave, m.table->accuracy.var);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

} // namespace olce
