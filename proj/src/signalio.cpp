// Copyright 2026 The olce authors
//
// Licensed under the Apache License, Version 2.0

#include "olce/signalio.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "olce/rng.hpp"

namespace olce {

using ordered_json = nlohmann::ordered_json;

LabelVector LabelVector::one_hot(int k, int num_classes) {
    if (k < 0 || k >= num_classes)
        throw ConfigError("one_hot: class " + std::to_string(k) + " outside [0, " +
                          std::to_string(num_classes) + ")");
    LabelVector v;
    v.probs.assign(num_classes, 0.0);
    v.probs[k] = 1.0;
    return v;
}

int LabelVector::argmax() const {
    return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

bool LabelVector::is_one_hot() const {
    int ones = 0;
    for (double p : probs) {
        if (p == 1.0) ++ones;
        else if (p != 0.0) return false;
    }
    return ones == 1;
}

bool LabelVector::is_distribution() const {
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0 && p <= 1.0)) return false;
        sum += p;
    }
    return std::abs(sum - 1.0) < 1e-9;
}

void validate_sample(const ResponseSample& s, int channels, int length) {
    if (s.sensors.channels() != channels || s.sensors.length() != length)
        throw DimensionError("sample '" + s.source_id + "': expected " +
                             Shape3{channels, length}.str() + ", found " +
                             s.sensors.shape().str());
    if (!s.sensors.all_finite())
        throw DataError("sample '" + s.source_id + "' contains non-finite values");
}

namespace {

std::string header_for(int channels) {
    if (channels == kDefaultChannels) return kSensorHeader;
    std::string h;
    for (int c = 0; c < channels; ++c) {
        if (c) h += ',';
        h += "S" + std::to_string(c + 1);
    }
    return h;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t pos = line.find(',', start);
        std::string tok = line.substr(start, pos == std::string::npos ? pos : pos - start);
        // trim whitespace and stray \r
        while (!tok.empty() && (tok.back() == '\r' || tok.back() == ' ' || tok.back() == '\t'))
            tok.pop_back();
        while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t'))
            tok.erase(tok.begin());
        out.push_back(std::move(tok));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_cell(const std::string& tok, int row, int col) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw ParseError("non-numeric cell '" + tok + "' at row " + std::to_string(row) +
                         ", column " + std::to_string(col));
    return v;
}

} // namespace

ResponseSample load_sample(const std::filesystem::path& path, int label,
                           int channels, int length) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open sample file: " + path.string());

    std::string line;
    if (!std::getline(in, line))
        throw ParseError("empty sample file: " + path.string());
    // Header row: only the column count is enforced.
    if (static_cast<int>(split_csv_line(line).size()) != channels)
        throw DimensionError(path.string() + ": expected " + std::to_string(channels) +
                             " header columns, found " +
                             std::to_string(split_csv_line(line).size()));

    ResponseSample s;
    s.sensors = Tensor3(channels, length);
    s.label = label;
    s.source_id = path.stem().string();

    int row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        if (row >= length) { ++row; continue; } // keep counting for the error message
        auto toks = split_csv_line(line);
        if (static_cast<int>(toks.size()) != channels)
            throw DimensionError(path.string() + ": expected " + std::to_string(channels) +
                                 " columns, found " + std::to_string(toks.size()) +
                                 " (row " + std::to_string(row + 1) + ")");
        for (int c = 0; c < channels; ++c)
            s.sensors.at(c, row) = parse_cell(toks[c], row + 1, c + 1);
        ++row;
    }
    if (row != length)
        throw DimensionError(path.string() + ": expected " + std::to_string(length) +
                             " rows, found " + std::to_string(row));
    validate_sample(s, channels, length);
    return s;
}

void save_sample(const std::filesystem::path& path, const ResponseSample& s) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write sample file: " + path.string());
    out << header_for(s.sensors.channels()) << '\n';
    char buf[64];
    for (int t = 0; t < s.sensors.length(); ++t) {
        for (int c = 0; c < s.sensors.channels(); ++c) {
            std::snprintf(buf, sizeof buf, "%.9g", s.sensors.at(c, t));
            if (c) out << ',';
            out << buf;
        }
        out << '\n';
    }
    if (!out)
        throw IoError("write failed: " + path.string());
}

ResponseSample zero_center_normalize(const ResponseSample& s) {
    ResponseSample out = s;
    const int T = s.sensors.length();
    for (int c = 0; c < s.sensors.channels(); ++c) {
        const double* src = s.sensors.row(c);
        double mean = 0.0, lo = src[0], hi = src[0];
        for (int t = 0; t < T; ++t) {
            mean += src[t];
            lo = std::min(lo, src[t]);
            hi = std::max(hi, src[t]);
        }
        mean /= T;
        double* dst = out.sensors.row(c);
        if (hi == lo) {
            std::fill(dst, dst + T, 0.0);
        } else {
            const double inv = 1.0 / (hi - lo);
            for (int t = 0; t < T; ++t)
                dst[t] = (src[t] - mean) * inv;
        }
    }
    return out;
}

Dataset normalize_dataset(Dataset ds) {
    for (auto& s : ds.samples)
        s = zero_center_normalize(s);
    return ds;
}

Dataset stratified_split(Dataset ds, double test_fraction, uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ConfigError("test_fraction must be in (0, 1), got " +
                          std::to_string(test_fraction));
    std::map<int, std::vector<int>> by_class;
    for (int i = 0; i < static_cast<int>(ds.samples.size()); ++i) {
        int lbl = ds.samples[i].label;
        if (lbl < 0 || lbl >= ds.num_classes)
            throw DataError("sample label " + std::to_string(lbl) + " outside [0, " +
                            std::to_string(ds.num_classes) + ")");
        by_class[lbl].push_back(i);
    }
    SplitIndices split;
    for (auto& [cls, idx] : by_class) {
        if (idx.size() < 2)
            throw DataError("stratification requires at least 2 samples per class; class " +
                            std::to_string(cls) + " has " + std::to_string(idx.size()));
        Rng rng(Rng::derive(seed, 0x5354524154ULL, static_cast<uint64_t>(cls)));
        rng.shuffle(idx);
        long n_test = std::lround(static_cast<double>(idx.size()) * test_fraction);
        n_test = std::min<long>(n_test, static_cast<long>(idx.size()) - 1);
        split.test.insert(split.test.end(), idx.begin(), idx.begin() + n_test);
        split.train.insert(split.train.end(), idx.begin() + n_test, idx.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    ds.split = std::move(split);
    return ds;
}

Dataset load_manifest(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in)
        throw IoError("cannot open manifest: " + manifest_path.string());
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ParseError("manifest " + manifest_path.string() + ": " + e.what());
    }
    if (!j.contains("num_classes") || !j.contains("samples"))
        throw ParseError("manifest " + manifest_path.string() +
                         " missing required keys (num_classes, samples)");

    Dataset ds;
    ds.num_classes = j.at("num_classes").get<int>();
    if (ds.num_classes < 2)
        throw DataError("manifest num_classes must be >= 2, got " +
                        std::to_string(ds.num_classes));
    if (j.contains("class_names"))
        ds.class_names = j.at("class_names").get<std::vector<std::string>>();
    const int channels = j.value("channels", kDefaultChannels);
    const int length   = j.value("length", kDefaultLength);

    const auto base = manifest_path.parent_path();
    for (const auto& entry : j.at("samples")) {
        const std::string rel = entry.at("path").get<std::string>();
        const int label = entry.at("label").get<int>();
        if (label < 0 || label >= ds.num_classes)
            throw DataError("manifest label " + std::to_string(label) + " outside [0, " +
                            std::to_string(ds.num_classes) + ") for " + rel);
        ds.samples.push_back(load_sample(base / rel, label, channels, length));
    }
    return ds;
}

std::filesystem::path save_dataset(const std::filesystem::path& dir, const Dataset& ds) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create output dir: " + dir.string() + " (" + ec.message() + ")");

    ordered_json j;
    j["num_classes"] = ds.num_classes;
    ordered_json names = ordered_json::array();
    for (int k = 0; k < ds.num_classes; ++k)
        names.push_back(k < static_cast<int>(ds.class_names.size())
                            ? ds.class_names[k]
                            : "class_" + std::to_string(k));
    j["class_names"] = names;
    if (ds.channels() != kDefaultChannels) j["channels"] = ds.channels();
    if (ds.length() != kDefaultLength) j["length"] = ds.length();

    ordered_json samples = ordered_json::array();
    for (size_t i = 0; i < ds.samples.size(); ++i) {
        const auto& s = ds.samples[i];
        std::string name = s.source_id.empty() ? "sample_" + std::to_string(i) : s.source_id;
        name += ".csv";
        save_sample(dir / name, s);
        samples.push_back({{"path", name}, {"label", s.label}});
    }
    j["samples"] = samples;

    const auto manifest = dir / "manifest.json";
    std::ofstream out(manifest);
    if (!out)
        throw IoError("cannot write manifest: " + manifest.string());
    out << j.dump(2) << '\n';
    return manifest;
}

} // namespace olce
