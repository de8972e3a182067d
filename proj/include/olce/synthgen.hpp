// Copyright 2026 The olce authors
// Synthetic e-nose dataset generator: saturating-exponential response
// kinetics, signed baseline drift, within-class jitter, white noise.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "olce/signalio.hpp"

namespace olce {

struct SynthConfig {
    int num_classes       = 7;
    int samples_per_class = 100;
    int channels          = kDefaultChannels;
    int length            = kDefaultLength;
    double noise_sigma        = 0.0;  // additive Gaussian, per data point
    double drift_scale        = 0.0;  // max |slope| of the linear drift term
    double within_class_jitter = 0.0; // class params scaled by 1 +- jitter per sample
    uint64_t seed = 0;

    void validate() const;
};

/// Named parameter sets exposed by the CLI. "desk" is calibrated so the
/// benchmark classifiers land in a realistic accuracy band; "easy" and
/// "hard" bracket it.
SynthConfig synth_preset(const std::string& name);
std::vector<std::string> synth_preset_names();

/// Deterministic for a fixed config. Class identities depend only on
/// (seed, class, channel); per-sample jitter and noise come from an
/// independent substream keyed by (seed, class, sample index).
Dataset generate(const SynthConfig& cfg);

/// Noiseless, jitter-free trace of one class (the class template).
Tensor3 class_mean_trace(const SynthConfig& cfg, int cls);

} // namespace olce
