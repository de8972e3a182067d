// Copyright 2026 The olce authors
//
// Licensed under the Apache License, Version 2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "olce/synthgen.hpp"

using namespace olce;

namespace {

SynthConfig small_cfg() {
    SynthConfig cfg;
    cfg.num_classes = 4;
    cfg.samples_per_class = 6;
    cfg.channels = 5;
    cfg.length = 32;
    cfg.noise_sigma = 0.1;
    cfg.drift_scale = 0.004;
    cfg.within_class_jitter = 0.1;
    cfg.seed = 99;
    return cfg;
}

} // namespace

TEST_CASE("degenerate generator: zero noise and jitter collapse each class") {
    SynthConfig cfg = small_cfg();
    cfg.noise_sigma = 0.0;
    cfg.within_class_jitter = 0.0;
    const Dataset ds = generate(cfg);
    for (int cls = 0; cls < cfg.num_classes; ++cls) {
        const ResponseSample* first = nullptr;
        for (const auto& s : ds.samples) {
            if (s.label != cls) continue;
            if (!first) first = &s;
            else CHECK(s.sensors == first->sensors);
        }
    }
}

TEST_CASE("determinism: identical configs generate identical datasets") {
    const Dataset a = generate(small_cfg());
    const Dataset b = generate(small_cfg());
    REQUIRE(a.samples.size() == b.samples.size());
    for (size_t i = 0; i < a.samples.size(); ++i) {
        CHECK(a.samples[i].sensors == b.samples[i].sensors);
        CHECK(a.samples[i].label == b.samples[i].label);
        CHECK(a.samples[i].source_id == b.samples[i].source_id);
    }
}

TEST_CASE("class identities do not depend on samples_per_class") {
    SynthConfig cfg = small_cfg();
    cfg.noise_sigma = 0.0;
    cfg.within_class_jitter = 0.0;
    cfg.samples_per_class = 4;
    const Dataset small = generate(cfg);
    cfg.samples_per_class = 9;
    const Dataset large = generate(cfg);
    for (int cls = 0; cls < cfg.num_classes; ++cls) {
        const Tensor3* a = nullptr;
        const Tensor3* b = nullptr;
        for (const auto& s : small.samples)
            if (s.label == cls) { a = &s.sensors; break; }
        for (const auto& s : large.samples)
            if (s.label == cls) { b = &s.sensors; break; }
        CHECK(*a == *b);
    }
}

TEST_CASE("noise-free class mean traces are pairwise distinct") {
    SynthConfig cfg = small_cfg();
    cfg.noise_sigma = 0.0;
    cfg.within_class_jitter = 0.0;
    // 9 classes exercise same-scent-family pairs too.
    cfg.num_classes = 9;
    for (int a = 0; a < cfg.num_classes; ++a)
        for (int b = a + 1; b < cfg.num_classes; ++b) {
            const Tensor3 ta = class_mean_trace(cfg, a);
            const Tensor3 tb = class_mean_trace(cfg, b);
            double dist = 0.0;
            for (size_t i = 0; i < ta.size(); ++i) {
                const double d = ta.data()[i] - tb.data()[i];
                dist += d * d;
            }
            CHECK(dist > 0.0);
        }
}

TEST_CASE("generated samples satisfy the sample invariants") {
    const SynthConfig cfg = small_cfg();
    const Dataset ds = generate(cfg);
    CHECK(ds.samples.size() ==
          static_cast<size_t>(cfg.num_classes) * cfg.samples_per_class);
    CHECK(ds.num_classes == cfg.num_classes);
    for (const auto& s : ds.samples) {
        CHECK_NOTHROW(validate_sample(s, cfg.channels, cfg.length));
        CHECK(s.label >= 0);
        CHECK(s.label < cfg.num_classes);
    }
}

TEST_CASE("presets: known names parse, unknown names list the valid set") {
    for (const auto& name : synth_preset_names()) {
        const SynthConfig cfg = synth_preset(name);
        CHECK(cfg.num_classes == 7);
        CHECK(cfg.samples_per_class == 100);
        CHECK_NOTHROW(cfg.validate());
    }
    CHECK_THROWS_WITH_AS(synth_preset("bogus"), doctest::Contains("desk"), ConfigError);
}

TEST_CASE("config validation rejects out-of-range parameters") {
    SynthConfig cfg = small_cfg();
    cfg.num_classes = 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_cfg();
    cfg.samples_per_class = 3;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_cfg();
    cfg.within_class_jitter = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_cfg();
    cfg.noise_sigma = -0.1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
