// Copyright 2026 The olce authors
//
// Licensed under the Apache License, Version 2.0

#include "olce/synthgen.hpp"

#include <cmath>
#include <cstdio>

#include "olce/rng.hpp"

namespace olce {

void SynthConfig::validate() const {
    if (num_classes < 2)
        throw ConfigError("synth: num_classes must be >= 2");
    if (samples_per_class < 4)
        throw ConfigError("synth: samples_per_class must be >= 4");
    if (length < 8)
        throw ConfigError("synth: length must be >= 8");
    if (channels < 1)
        throw ConfigError("synth: channels must be >= 1");
    if (noise_sigma < 0.0 || drift_scale < 0.0)
        throw ConfigError("synth: noise_sigma and drift_scale must be >= 0");
    if (within_class_jitter < 0.0 || within_class_jitter >= 1.0)
        throw ConfigError("synth: within_class_jitter must lie in [0, 1)");
}

SynthConfig synth_preset(const std::string& name) {
    SynthConfig cfg;
    cfg.seed = 42;
    if (name == "desk") {
        cfg.noise_sigma = 0.10;
        cfg.drift_scale = 0.005;
        cfg.within_class_jitter = 0.12;
    } else if (name == "easy") {
        cfg.noise_sigma = 0.03;
        cfg.drift_scale = 0.005;
        cfg.within_class_jitter = 0.05;
    } else if (name == "hard") {
        cfg.noise_sigma = 0.18;
        cfg.drift_scale = 0.005;
        cfg.within_class_jitter = 0.22;
    } else {
        std::string valid;
        for (const auto& n : synth_preset_names()) valid += (valid.empty() ? "" : ", ") + n;
        throw ConfigError("unknown preset '" + name + "' (valid presets: " + valid + ")");
    }
    return cfg;
}

std::vector<std::string> synth_preset_names() { return {"desk", "easy", "hard"}; }

namespace {

struct ChannelParams {
    double amplitude;   // signed: some sensors respond downward
    double tau;         // rise time constant, in sample units
    double drift;       // signed linear slope
};

// Classes are seeded perturbations of one shared sensor family: each
// channel keeps its sign and baseline kinetics across classes (one
// physical sensor array), and class identity lives in per-channel
// deviations of rise time and drift. The per-point normalization the
// models consume cancels pure amplitude scaling, so shape and drift
// carry the class information. Channel informativeness varies: a few
// channels separate classes strongly, the rest stay confusable.
constexpr double kAmpSpread   = 0.25;
constexpr double kTauSpread   = 1.90; // log-scale: up to ~6x on informative channels
constexpr double kDriftSpread = 4.00;
// Classes cluster into scent families; within-family deltas are scaled
// down so those pairs stay genuinely confusable.
constexpr int kFamilies = 4;
constexpr double kWithinFamily = 0.35;

// Class parameters come from their own substream so they are unaffected
// by samples_per_class or sample order.
std::vector<ChannelParams> draw_class_params(const SynthConfig& cfg, int cls) {
    Rng base_rng(Rng::derive(cfg.seed, 0x424153454cULL));
    Rng family_rng(Rng::derive(cfg.seed, 0x46414dULL,
                               static_cast<uint64_t>(cls % kFamilies)));
    Rng rng(Rng::derive(cfg.seed, 0x434c415353ULL, static_cast<uint64_t>(cls)));
    const double norm = 1.0 + kWithinFamily;
    std::vector<ChannelParams> params(cfg.channels);
    for (auto& p : params) {
        const double sign = base_rng.uniform() < 0.75 ? 1.0 : -1.0;
        const double base_amp = sign * base_rng.uniform(0.6, 1.8);
        const double base_tau = base_rng.uniform(0.08, 0.30) * cfg.length;
        const double base_drift = cfg.drift_scale * base_rng.uniform(-1.0, 1.0);
        const double info = base_rng.uniform() * base_rng.uniform(); // skewed low
        const double ua = (family_rng.uniform(-1.0, 1.0) +
                           kWithinFamily * rng.uniform(-1.0, 1.0)) / norm;
        const double ut = (family_rng.uniform(-1.0, 1.0) +
                           kWithinFamily * rng.uniform(-1.0, 1.0)) / norm;
        const double ud = (family_rng.uniform(-1.0, 1.0) +
                           kWithinFamily * rng.uniform(-1.0, 1.0)) / norm;
        p.amplitude = base_amp * (1.0 + kAmpSpread * info * ua);
        p.tau       = base_tau * std::exp(kTauSpread * info * ut);
        p.drift     = base_drift + cfg.drift_scale * kDriftSpread * info * ud;
    }
    return params;
}

double clean_value(const ChannelParams& p, int t) {
    return p.amplitude * (1.0 - std::exp(-static_cast<double>(t) / p.tau)) +
           p.drift * static_cast<double>(t);
}

} // namespace

Tensor3 class_mean_trace(const SynthConfig& cfg, int cls) {
    cfg.validate();
    const auto params = draw_class_params(cfg, cls);
    Tensor3 trace(cfg.channels, cfg.length);
    for (int c = 0; c < cfg.channels; ++c)
        for (int t = 0; t < cfg.length; ++t)
            trace.at(c, t) = clean_value(params[c], t);
    return trace;
}

Dataset generate(const SynthConfig& cfg) {
    cfg.validate();
    Dataset ds;
    ds.num_classes = cfg.num_classes;
    for (int k = 0; k < cfg.num_classes; ++k)
        ds.class_names.push_back("class_" + std::to_string(k));
    ds.samples.reserve(static_cast<size_t>(cfg.num_classes) * cfg.samples_per_class);

    char id[64];
    for (int cls = 0; cls < cfg.num_classes; ++cls) {
        const auto params = draw_class_params(cfg, cls);
        for (int i = 0; i < cfg.samples_per_class; ++i) {
            // Independent substream per sample; scheduling-free determinism.
            Rng noise(Rng::derive(cfg.seed, 0x4e4f495345ULL,
                                  static_cast<uint64_t>(cls) * 1000003ULL +
                                      static_cast<uint64_t>(i)));
            ResponseSample s;
            s.sensors = Tensor3(cfg.channels, cfg.length);
            s.label = cls;
            std::snprintf(id, sizeof id, "class_%d_s%03d", cls, i);
            s.source_id = id;

            const double j = cfg.within_class_jitter;
            for (int c = 0; c < cfg.channels; ++c) {
                ChannelParams p = params[c];
                p.amplitude *= 1.0 + j * (2.0 * noise.uniform() - 1.0);
                p.tau       *= 1.0 + j * (2.0 * noise.uniform() - 1.0);
                p.drift     *= 1.0 + j * (2.0 * noise.uniform() - 1.0);
                double* row = s.sensors.row(c);
                for (int t = 0; t < cfg.length; ++t)
                    row[t] = clean_value(p, t) +
                             (cfg.noise_sigma > 0.0 ? cfg.noise_sigma * noise.gaussian() : 0.0);
            }
            ds.samples.push_back(std::move(s));
        }
    }
    return ds;
}

} // namespace olce
