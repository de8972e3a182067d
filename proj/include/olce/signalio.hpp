// Copyright 2026 The olce authors
// Sample data model, CSV/manifest ingestion, zero-center normalization,
// stratified splitting.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "olce/tensor.hpp"

namespace olce {

inline constexpr int kDefaultChannels = 10;
inline constexpr int kDefaultLength   = 120;

/// Canonical sensor-array header for 10-channel files.
inline constexpr const char* kSensorHeader =
    "W1C,W5S,W3C,W6S,W5C,W1S,W1W,W2S,W2W,W3S";

/// One e-nose measurement: channels x time points plus class label.
struct ResponseSample {
    Tensor3 sensors;            // (C, 1, T), row per sensor channel
    int label = 0;
    std::string source_id;
};

struct SplitIndices {
    std::vector<int> train;
    std::vector<int> test;
};

struct Dataset {
    std::vector<ResponseSample> samples;
    int num_classes = 0;
    std::vector<std::string> class_names;   // optional; size K when present
    std::optional<SplitIndices> split;

    int channels() const { return samples.empty() ? 0 : samples[0].sensors.channels(); }
    int length() const { return samples.empty() ? 0 : samples[0].sensors.length(); }
};

/// One-hot / soft probability vector over K classes.
struct LabelVector {
    std::vector<double> probs;

    static LabelVector one_hot(int k, int num_classes);
    int argmax() const;
    bool is_one_hot() const;
    /// Entries in [0,1] summing to 1 within 1e-9.
    bool is_distribution() const;
};

/// Throws unless the sample has the expected geometry and finite values.
void validate_sample(const ResponseSample& s,
                     int channels = kDefaultChannels,
                     int length   = kDefaultLength);

/// Reads a header + T x C CSV body. Row = time step, column = sensor.
ResponseSample load_sample(const std::filesystem::path& path, int label,
                           int channels = kDefaultChannels,
                           int length   = kDefaultLength);

/// Writes header + body with 9 significant digits per value.
void save_sample(const std::filesystem::path& path, const ResponseSample& s);

/// Per channel: (x - mean) / (max - min) over that channel's trace.
/// A constant channel (max == min) maps to all zeros.
ResponseSample zero_center_normalize(const ResponseSample& s);

/// Normalizes every sample; split and metadata are preserved.
Dataset normalize_dataset(Dataset ds);

/// Records a deterministic stratified split on the dataset. Per-class
/// test count = round(class size * test_fraction), capped so at least
/// one training sample remains per class.
Dataset stratified_split(Dataset ds, double test_fraction, uint64_t seed);

/// Manifest JSON { num_classes, class_names, samples: [{path, label}] }.
/// Sample paths are resolved relative to the manifest's directory.
Dataset load_manifest(const std::filesystem::path& manifest_path);

/// Writes manifest.json plus one CSV per sample (named from source_id)
/// under dir. Returns the manifest path.
std::filesystem::path save_dataset(const std::filesystem::path& dir, const Dataset& ds);

} // namespace olce
