// Copyright 2026 The olce authors
// Command-line front end: generate, train, eval, bench, gradcheck,
// export-decoded.
//
// Licensed under the Apache License, Version 2.0

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "olce/bench.hpp"
#include "olce/olce_model.hpp"

namespace {

using olce::Rng;
using ordered_json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

/// Optional JSON config file mirroring the flags; explicit flags win.
struct ConfigFile {
    ordered_json values;

    void load(const std::string& path) {
        std::ifstream in(path);
        if (!in)
            throw olce::IoError("cannot open config file: " + path);
        try {
            in >> values;
        } catch (const std::exception& e) {
            throw olce::ParseError("config " + path + ": " + e.what());
        }
    }

    template <class T>
    void apply(const CLI::Option* opt, const char* key, T& target) const {
        if (opt->count() == 0 && values.contains(key))
            target = values.at(key).get<T>();
    }
};

void echo_config(const char* command, const ordered_json& cfg) {
    std::cout << "effective config (" << command << "):\n" << cfg.dump(2) << "\n";
}

olce::Dataset load_normalized(const std::string& manifest, const std::string& preset) {
    if (manifest.empty() == preset.empty())
        throw olce::ConfigError("exactly one of --manifest or --preset is required");
    olce::Dataset ds = manifest.empty() ? olce::generate(olce::synth_preset(preset))
                                        : olce::load_manifest(manifest);
    return olce::normalize_dataset(std::move(ds));
}

void print_class_summary(const olce::Dataset& ds) {
    std::vector<int> counts(ds.num_classes, 0);
    for (const auto& s : ds.samples) ++counts[s.label];
    std::cout << "classes: " << ds.num_classes << ", samples: " << ds.samples.size() << "\n";
    for (int k = 0; k < ds.num_classes; ++k) {
        const std::string name = k < static_cast<int>(ds.class_names.size())
                                     ? ds.class_names[k]
                                     : "class_" + std::to_string(k);
        std::cout << "  " << name << ": " << counts[k] << "\n";
    }
}

int run_generate(const std::string& preset, const std::string& config_path,
                 const std::string& out_dir, uint64_t seed, bool seed_set) {
    olce::SynthConfig cfg;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in)
            throw olce::IoError("cannot open config file: " + config_path);
        ordered_json j;
        in >> j;
        cfg.num_classes = j.value("num_classes", cfg.num_classes);
        cfg.samples_per_class = j.value("samples_per_class", cfg.samples_per_class);
        cfg.channels = j.value("channels", cfg.channels);
        cfg.length = j.value("length", cfg.length);
        cfg.noise_sigma = j.value("noise_sigma", cfg.noise_sigma);
        cfg.drift_scale = j.value("drift_scale", cfg.drift_scale);
        cfg.within_class_jitter = j.value("within_class_jitter", cfg.within_class_jitter);
        cfg.seed = j.value("seed", cfg.seed);
    } else {
        cfg = olce::synth_preset(preset);
    }
    if (seed_set) cfg.seed = seed;

    echo_config("generate", {{"preset", preset},
                             {"config", config_path},
                             {"out", out_dir},
                             {"num_classes", cfg.num_classes},
                             {"samples_per_class", cfg.samples_per_class},
                             {"channels", cfg.channels},
                             {"length", cfg.length},
                             {"noise_sigma", cfg.noise_sigma},
                             {"drift_scale", cfg.drift_scale},
                             {"within_class_jitter", cfg.within_class_jitter},
                             {"seed", cfg.seed}});

    const olce::Dataset ds = olce::generate(cfg);
    const auto manifest = olce::save_dataset(out_dir, ds);
    print_class_summary(ds);
    std::cout << "wrote " << manifest.string() << "\n";
    return kExitOk;
}

std::vector<int> default_export_indices(const olce::Dataset& ds, int count) {
    // One sample per class first, then round-robin.
    std::vector<int> indices;
    for (int pass = 0; static_cast<int>(indices.size()) < count; ++pass) {
        bool found = false;
        for (int k = 0; k < ds.num_classes && static_cast<int>(indices.size()) < count; ++k) {
            int seen = 0;
            for (size_t i = 0; i < ds.samples.size(); ++i) {
                if (ds.samples[i].label != k) continue;
                if (seen++ == pass) {
                    indices.push_back(static_cast<int>(i));
                    found = true;
                    break;
                }
            }
        }
        if (!found) break;
    }
    return indices;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"odor-identification encoder-decoder toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON file with flag defaults")
        ->configurable(false);

    // generate
    auto* gen = app.add_subcommand("generate", "emit a synthetic dataset (manifest + CSVs)");
    std::string gen_preset, gen_cfg_file, gen_out = "dataset";
    uint64_t gen_seed = 0;
    auto* gen_preset_opt = gen->add_option("--preset", gen_preset, "synth preset name");
    auto* gen_cfg_opt = gen->add_option("--synth-config", gen_cfg_file,
                                        "JSON synth parameters (overrides preset)");
    auto* gen_out_opt = gen->add_option("--out", gen_out, "output directory");
    auto* gen_seed_opt = gen->add_option("--seed", gen_seed, "generator seed override");

    // train
    auto* train = app.add_subcommand("train", "train the encoder-decoder on a dataset");
    std::string train_manifest, train_preset, train_out = "train_out";
    double train_fraction = 0.25, train_lr = 1e-3, train_lambda = 1.0;
    int train_epochs = 200, train_batch = 16;
    uint64_t train_seed = 0;
    auto* tr_manifest = train->add_option("--manifest", train_manifest, "dataset manifest");
    auto* tr_preset = train->add_option("--preset", train_preset, "synth preset");
    auto* tr_frac = train->add_option("--test-fraction", train_fraction, "held-out fraction");
    auto* tr_epochs = train->add_option("--epochs", train_epochs, "training epochs");
    auto* tr_batch = train->add_option("--batch-size", train_batch, "mini-batch size");
    auto* tr_lr = train->add_option("--lr", train_lr, "learning rate");
    auto* tr_lambda = train->add_option("--lambda-recon", train_lambda,
                                        "reconstruction loss weight");
    auto* tr_seed = train->add_option("--seed", train_seed, "split/init seed");
    auto* tr_out = train->add_option("--out", train_out, "output directory");

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    std::string eval_manifest, eval_checkpoint, eval_out = "eval_out";
    double eval_fraction = 0.0;
    uint64_t eval_seed = 0;
    auto* ev_manifest = eval->add_option("--manifest", eval_manifest, "dataset manifest");
    auto* ev_ckpt = eval->add_option("--checkpoint", eval_checkpoint, "checkpoint path");
    auto* ev_frac = eval->add_option("--test-fraction", eval_fraction,
                                     "evaluate only a held-out split of this size "
                                     "(0: whole dataset)");
    auto* ev_seed = eval->add_option("--seed", eval_seed, "split seed");
    auto* ev_out = eval->add_option("--out", eval_out, "output directory");

    // bench
    auto* bench = app.add_subcommand("bench", "repeated-run model comparison");
    olce::BenchConfig bcfg;
    bcfg.out_dir = "bench_out";
    std::string bench_models;
    auto* b_manifest = bench->add_option("--manifest", bcfg.manifest, "dataset manifest");
    auto* b_preset = bench->add_option("--preset", bcfg.preset, "synth preset");
    auto* b_models = bench->add_option("--models", bench_models,
                                       "comma-separated subset of models");
    auto* b_runs = bench->add_option("--runs", bcfg.runs, "number of repetitions");
    auto* b_seed = bench->add_option("--seed", bcfg.base_seed, "base seed");
    auto* b_frac = bench->add_option("--test-fraction", bcfg.test_fraction,
                                     "held-out fraction per run");
    auto* b_epochs = bench->add_option("--epochs", bcfg.olce.epochs, "encoder-decoder epochs");
    auto* b_lr = bench->add_option("--lr", bcfg.olce.lr, "encoder-decoder learning rate");
    auto* b_lambda = bench->add_option("--lambda-recon", bcfg.olce.lambda_recon,
                                       "reconstruction loss weight");
    auto* b_mlp_epochs = bench->add_option("--mlp-epochs", bcfg.mlp.epochs, "MLP epochs");
    auto* b_cnn_epochs = bench->add_option("--cnn-epochs", bcfg.cnn_svm.cnn_epochs,
                                           "CNN feature extractor epochs");
    auto* b_out = bench->add_option("--out", bcfg.out_dir, "output directory");
    auto* b_jobs = bench->add_option("--jobs", bcfg.jobs, "parallel workers (0 = auto)");

    // gradcheck
    auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient verification");
    std::string gc_model = "olce";
    double gc_tolerance = 1e-4, gc_h = 1e-5;
    uint64_t gc_seed = 0;
    std::string gc_out;
    auto* g_model = gc->add_option("--model", gc_model, "olce or mlp");
    auto* g_tol = gc->add_option("--tolerance", gc_tolerance, "pass threshold");
    auto* g_h = gc->add_option("--step", gc_h, "finite-difference step");
    auto* g_seed = gc->add_option("--seed", gc_seed, "sampling seed");
    auto* g_out = gc->add_option("--out", gc_out, "optional report JSON path");

    // export-decoded
    auto* exp = app.add_subcommand("export-decoded",
                                   "write original/decoded CSV pairs for inspection");
    std::string exp_manifest, exp_preset, exp_checkpoint, exp_out = "decoded_out";
    int exp_count = 7;
    auto* x_manifest = exp->add_option("--manifest", exp_manifest, "dataset manifest");
    auto* x_preset = exp->add_option("--preset", exp_preset, "synth preset");
    auto* x_ckpt = exp->add_option("--checkpoint", exp_checkpoint, "checkpoint path");
    auto* x_count = exp->add_option("--count", exp_count, "number of samples to export");
    auto* x_out = exp->add_option("--out", exp_out, "output directory");

    for (auto* sub : app.get_subcommands(nullptr))
        sub->fallthrough(); // parent --config may follow the subcommand

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        ConfigFile file;
        if (!config_path.empty()) file.load(config_path);

        if (gen->parsed()) {
            file.apply(gen_preset_opt, "preset", gen_preset);
            file.apply(gen_cfg_opt, "synth_config", gen_cfg_file);
            file.apply(gen_out_opt, "out", gen_out);
            file.apply(gen_seed_opt, "seed", gen_seed);
            if (gen_preset.empty() && gen_cfg_file.empty())
                throw olce::ConfigError("generate needs --preset or --synth-config");
            return run_generate(gen_preset, gen_cfg_file, gen_out,
                                gen_seed, gen_seed_opt->count() > 0 ||
                                              file.values.contains("seed"));
        }

        if (train->parsed()) {
            file.apply(tr_manifest, "manifest", train_manifest);
            file.apply(tr_preset, "preset", train_preset);
            file.apply(tr_frac, "test_fraction", train_fraction);
            file.apply(tr_epochs, "epochs", train_epochs);
            file.apply(tr_batch, "batch_size", train_batch);
            file.apply(tr_lr, "lr", train_lr);
            file.apply(tr_lambda, "lambda_recon", train_lambda);
            file.apply(tr_seed, "seed", train_seed);
            file.apply(tr_out, "out", train_out);

            olce::TrainConfig cfg;
            cfg.epochs = train_epochs;
            cfg.batch_size = train_batch;
            cfg.lr = train_lr;
            cfg.lambda_recon = train_lambda;
            cfg.seed = train_seed;
            echo_config("train", {{"manifest", train_manifest},
                                  {"preset", train_preset},
                                  {"test_fraction", train_fraction},
                                  {"epochs", cfg.epochs},
                                  {"batch_size", cfg.batch_size},
                                  {"lr", cfg.lr},
                                  {"lambda_recon", cfg.lambda_recon},
                                  {"seed", cfg.seed},
                                  {"out", train_out}});

            olce::Dataset ds = load_normalized(train_manifest, train_preset);
            ds = olce::stratified_split(std::move(ds), train_fraction, train_seed);

            olce::OlceArch arch;
            arch.channels = ds.channels();
            arch.length = ds.length();
            arch.classes = ds.num_classes;
            olce::OlceModel model(arch, Rng::derive(train_seed, 0x4f4c4345ULL));
            const olce::TrainLog log = model.train(ds, cfg);

            std::filesystem::create_directories(train_out);
            const auto ckpt = std::filesystem::path(train_out) / "checkpoint.json";
            model.save(ckpt);
            const auto logp = std::filesystem::path(train_out) / "train_log.csv";
            std::ofstream lf(logp);
            lf << "epoch,ce,mse\n";
            char buf[96];
            for (size_t e = 0; e < log.ce.size(); ++e) {
                std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g\n", e + 1, log.ce[e],
                              log.mse[e]);
                lf << buf;
            }
            std::cout << "final ce " << log.ce.back() << ", mse " << log.mse.back() << "\n"
                      << "wrote " << ckpt.string() << " and " << logp.string() << "\n";
            return kExitOk;
        }

        if (eval->parsed()) {
            file.apply(ev_manifest, "manifest", eval_manifest);
            file.apply(ev_ckpt, "checkpoint", eval_checkpoint);
            file.apply(ev_frac, "test_fraction", eval_fraction);
            file.apply(ev_seed, "seed", eval_seed);
            file.apply(ev_out, "out", eval_out);
            if (eval_manifest.empty() || eval_checkpoint.empty())
                throw olce::ConfigError("eval needs --manifest and --checkpoint");
            echo_config("eval", {{"manifest", eval_manifest},
                                 {"checkpoint", eval_checkpoint},
                                 {"test_fraction", eval_fraction},
                                 {"seed", eval_seed},
                                 {"out", eval_out}});

            olce::Dataset ds = load_normalized(eval_manifest, "");
            std::vector<int> indices;
            if (eval_fraction > 0.0) {
                ds = olce::stratified_split(std::move(ds), eval_fraction, eval_seed);
                indices = ds.split->test;
            } else {
                indices.resize(ds.samples.size());
                for (size_t i = 0; i < indices.size(); ++i) indices[i] = static_cast<int>(i);
            }

            olce::OlceArch arch;
            arch.channels = ds.channels();
            arch.length = ds.length();
            arch.classes = ds.num_classes;
            const olce::OlceModel model = olce::OlceModel::load(eval_checkpoint, arch);

            std::vector<int> truth, pred;
            for (int i : indices) {
                truth.push_back(ds.samples[i].label);
                pred.push_back(model.classify(ds.samples[i].sensors));
            }
            const olce::EvalReport report =
                olce::evaluate(olce::confusion(truth, pred, ds.num_classes));

            std::filesystem::create_directories(eval_out);
            const auto rpath = std::filesystem::path(eval_out) / "eval_report.json";
            std::ofstream rf(rpath);
            rf << olce::to_json(report).dump(2) << "\n";
            std::cout << "accuracy " << report.accuracy << ", kappa " << report.kappa << "\n"
                      << "wrote " << rpath.string() << "\n";
            return kExitOk;
        }

        if (bench->parsed()) {
            file.apply(b_manifest, "manifest", bcfg.manifest);
            file.apply(b_preset, "preset", bcfg.preset);
            file.apply(b_models, "models", bench_models);
            file.apply(b_runs, "runs", bcfg.runs);
            file.apply(b_seed, "seed", bcfg.base_seed);
            file.apply(b_frac, "test_fraction", bcfg.test_fraction);
            file.apply(b_epochs, "epochs", bcfg.olce.epochs);
            file.apply(b_lr, "lr", bcfg.olce.lr);
            file.apply(b_lambda, "lambda_recon", bcfg.olce.lambda_recon);
            file.apply(b_mlp_epochs, "mlp_epochs", bcfg.mlp.epochs);
            file.apply(b_cnn_epochs, "cnn_epochs", bcfg.cnn_svm.cnn_epochs);
            file.apply(b_out, "out", bcfg.out_dir);
            file.apply(b_jobs, "jobs", bcfg.jobs);
            if (!bench_models.empty()) {
                bcfg.models.clear();
                std::string cur;
                for (char c : bench_models + ",") {
                    if (c == ',') {
                        if (!cur.empty()) bcfg.models.push_back(cur);
                        cur.clear();
                    } else {
                        cur += c;
                    }
                }
            }
            echo_config("bench", bcfg.to_json());

            const olce::BenchResult result = olce::run_bench(bcfg);
            std::cout << olce::comparison_table(result);
            for (const auto& p : result.written)
                std::cout << "wrote " << p.string() << "\n";
            for (const auto& m : result.models)
                for (size_t r = 0; r < m.outcomes.size(); ++r)
                    if (!m.outcomes[r].ok)
                        std::cout << "note: " << m.model << " run " << (r + 1)
                                  << " failed: " << m.outcomes[r].error << "\n";
            return kExitOk;
        }

        if (gc->parsed()) {
            file.apply(g_model, "model", gc_model);
            file.apply(g_tol, "tolerance", gc_tolerance);
            file.apply(g_h, "h", gc_h);
            file.apply(g_seed, "seed", gc_seed);
            file.apply(g_out, "out", gc_out);
            echo_config("gradcheck", {{"model", gc_model},
                                      {"tolerance", gc_tolerance},
                                      {"h", gc_h},
                                      {"seed", gc_seed}});

            olce::GradCheckReport report;
            if (gc_model == "olce") {
                report = olce::checked_olce_gradcheck(gc_seed, gc_tolerance, gc_h);
            } else if (gc_model == "mlp") {
                report = olce::checked_mlp_gradcheck(gc_seed, gc_tolerance, gc_h);
            } else {
                throw olce::ConfigError("gradcheck model must be 'olce' or 'mlp'");
            }

            std::printf("max relative error %.3e at %s: %s\n", report.max_rel_error,
                        report.worst_location.c_str(), report.pass ? "PASS" : "FAIL");
            if (!gc_out.empty()) {
                std::ofstream rf(gc_out);
                rf << ordered_json{{"model", gc_model},
                                   {"max_rel_error", report.max_rel_error},
                                   {"worst_location", report.worst_location},
                                   {"tolerance", gc_tolerance},
                                   {"pass", report.pass}}
                          .dump(2)
                   << "\n";
            }
            return report.pass ? kExitOk : kExitNumeric;
        }

        if (exp->parsed()) {
            file.apply(x_manifest, "manifest", exp_manifest);
            file.apply(x_preset, "preset", exp_preset);
            file.apply(x_ckpt, "checkpoint", exp_checkpoint);
            file.apply(x_count, "count", exp_count);
            file.apply(x_out, "out", exp_out);
            if (exp_checkpoint.empty())
                throw olce::ConfigError("export-decoded needs --checkpoint");
            echo_config("export-decoded", {{"manifest", exp_manifest},
                                           {"preset", exp_preset},
                                           {"checkpoint", exp_checkpoint},
                                           {"count", exp_count},
                                           {"out", exp_out}});

            olce::Dataset ds = load_normalized(exp_manifest, exp_preset);
            olce::OlceArch arch;
            arch.channels = ds.channels();
            arch.length = ds.length();
            arch.classes = ds.num_classes;
            const olce::OlceModel model = olce::OlceModel::load(exp_checkpoint, arch);
            const auto indices = default_export_indices(ds, exp_count);
            model.export_decoded(ds, indices, exp_out);
            std::cout << "wrote " << 2 * indices.size() << " files to " << exp_out << "\n";
            return kExitOk;
        }
    } catch (const olce::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const olce::NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
