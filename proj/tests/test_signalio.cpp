// Copyright 2026 The olce authors
//
// Licensed under the Apache License, Version 2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "olce/rng.hpp"
#include "olce/signalio.hpp"

using namespace olce;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static int counter = 0;
    auto dir = fs::temp_directory_path() /
               ("olce_signalio_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(dir);
    return dir;
}

ResponseSample make_sample(int label, uint64_t seed, int channels = kDefaultChannels,
                           int length = kDefaultLength) {
    Rng rng(seed);
    ResponseSample s;
    s.sensors = Tensor3(channels, length);
    for (size_t i = 0; i < s.sensors.size(); ++i)
        s.sensors.data()[i] = rng.uniform(-3.0, 7.0);
    s.label = label;
    s.source_id = "t" + std::to_string(seed);
    return s;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_csv(const fs::path& p, int rows, int cols, const std::string& cell = "0") {
    std::ofstream out(p);
    out << kSensorHeader << "\n";
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c)
            out << (c ? "," : "") << cell;
        out << "\n";
    }
}

} // namespace

TEST_CASE("zero CSV loads to an all-zero sample") {
    const auto dir = temp_dir();
    write_csv(dir / "z.csv", 120, 10);
    const ResponseSample s = load_sample(dir / "z.csv", 0);
    CHECK(s.label == 0);
    CHECK(s.sensors.shape() == Shape3{10, 120});
    for (size_t i = 0; i < s.sensors.size(); ++i)
        CHECK(s.sensors.data()[i] == 0.0);
}

TEST_CASE("row count mismatch is rejected with expected vs found") {
    const auto dir = temp_dir();
    write_csv(dir / "short.csv", 119, 10);
    CHECK_THROWS_WITH_AS(load_sample(dir / "short.csv", 0),
                         doctest::Contains("expected 120 rows, found 119"), DimensionError);
    write_csv(dir / "long.csv", 123, 10);
    CHECK_THROWS_WITH_AS(load_sample(dir / "long.csv", 0),
                         doctest::Contains("expected 120 rows, found 123"), DimensionError);
    write_csv(dir / "narrow.csv", 120, 9);
    CHECK_THROWS_AS(load_sample(dir / "narrow.csv", 0), DimensionError);
}

TEST_CASE("non-numeric cell reports row and column") {
    const auto dir = temp_dir();
    {
        std::ofstream out(dir / "bad.csv");
        out << kSensorHeader << "\n";
        for (int r = 0; r < 120; ++r) {
            for (int c = 0; c < 10; ++c)
                out << (c ? "," : "") << ((r == 4 && c == 2) ? "oops" : "1.5");
            out << "\n";
        }
    }
    CHECK_THROWS_WITH_AS(load_sample(dir / "bad.csv", 0), doctest::Contains("row 5, column 3"),
                         ParseError);
}

TEST_CASE("save/load round trip is exact at the serialized precision") {
    const auto dir = temp_dir();
    const ResponseSample s = make_sample(3, 17);
    save_sample(dir / "s.csv", s);
    const ResponseSample loaded = load_sample(dir / "s.csv", 3);
    save_sample(dir / "s2.csv", loaded);
    CHECK(read_file(dir / "s.csv") == read_file(dir / "s2.csv"));
    // 9 significant digits keep every value within relative 1e-8.
    for (size_t i = 0; i < s.sensors.size(); ++i) {
        const double a = s.sensors.data()[i], b = loaded.sensors.data()[i];
        CHECK(std::abs(a - b) <= 1e-8 * std::max(1.0, std::abs(a)));
    }
    // Header is the canonical sensor order.
    CHECK(read_file(dir / "s.csv").rfind(kSensorHeader, 0) == 0);
}

TEST_CASE("normalization: constant channel maps to zeros") {
    ResponseSample s;
    s.sensors = Tensor3(1, 120, 1.0);
    const ResponseSample out = zero_center_normalize(s);
    for (int t = 0; t < 120; ++t)
        CHECK(out.sensors.at(0, t) == 0.0);
}

TEST_CASE("normalization: two-point toy channel") {
    ResponseSample s;
    s.sensors = Tensor3(1, 2);
    s.sensors.at(0, 0) = 0.0;
    s.sensors.at(0, 1) = 2.0;
    const ResponseSample out = zero_center_normalize(s);
    CHECK(out.sensors.at(0, 0) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(out.sensors.at(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("normalization properties: zero mean, unit range, shape preserved") {
    for (uint64_t seed = 0; seed < 20; ++seed) {
        const ResponseSample s = make_sample(0, 100 + seed);
        const ResponseSample out = zero_center_normalize(s);
        CHECK(out.sensors.shape() == s.sensors.shape());
        for (int c = 0; c < out.sensors.channels(); ++c) {
            double sum = 0.0, lo = out.sensors.at(c, 0), hi = lo;
            for (int t = 0; t < out.sensors.length(); ++t) {
                const double v = out.sensors.at(c, t);
                sum += v;
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            CHECK(std::abs(sum) < 1e-9 * out.sensors.length());
            CHECK(std::abs((hi - lo) - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("stratified split: 7x100 at 0.25 gives 25 test samples per class") {
    Dataset ds;
    ds.num_classes = 7;
    for (int k = 0; k < 7; ++k)
        for (int i = 0; i < 100; ++i)
            ds.samples.push_back(make_sample(k, static_cast<uint64_t>(k) * 1000 + i, 2, 8));
    const Dataset split = stratified_split(ds, 0.25, 11);
    REQUIRE(split.split.has_value());
    CHECK(split.split->test.size() == 175);
    CHECK(split.split->train.size() == 525);
    std::vector<int> per_class(7, 0);
    for (int i : split.split->test)
        ++per_class[split.samples[i].label];
    for (int k = 0; k < 7; ++k)
        CHECK(per_class[k] == 25);
}

TEST_CASE("stratified split: determinism and disjoint cover") {
    Dataset ds;
    ds.num_classes = 3;
    Rng rng(5);
    for (int k = 0; k < 3; ++k) {
        const int n = 5 + rng.below(20);
        for (int i = 0; i < n; ++i)
            ds.samples.push_back(make_sample(k, static_cast<uint64_t>(k) * 997 + i, 2, 8));
    }
    const Dataset a = stratified_split(ds, 0.3, 7);
    const Dataset b = stratified_split(ds, 0.3, 7);
    CHECK(a.split->train == b.split->train);
    CHECK(a.split->test == b.split->test);

    std::set<int> all(a.split->train.begin(), a.split->train.end());
    for (int i : a.split->test)
        CHECK(all.insert(i).second); // disjoint
    CHECK(all.size() == ds.samples.size());

    const Dataset c = stratified_split(ds, 0.3, 8);
    CHECK(c.split->test != a.split->test);
}

TEST_CASE("stratified split: 7 classes x 4 samples at 0.25 gives one test each") {
    Dataset ds;
    ds.num_classes = 7;
    for (int k = 0; k < 7; ++k)
        for (int i = 0; i < 4; ++i)
            ds.samples.push_back(make_sample(k, static_cast<uint64_t>(k) * 31 + i, 2, 8));
    const Dataset split = stratified_split(ds, 0.25, 0);
    std::vector<int> per_class(7, 0);
    for (int i : split.split->test)
        ++per_class[split.samples[i].label];
    for (int k = 0; k < 7; ++k)
        CHECK(per_class[k] == 1);
}

TEST_CASE("stratified split rejects undersized classes and bad fractions") {
    Dataset ds;
    ds.num_classes = 2;
    ds.samples.push_back(make_sample(0, 1, 2, 8));
    ds.samples.push_back(make_sample(0, 2, 2, 8));
    ds.samples.push_back(make_sample(1, 3, 2, 8));
    CHECK_THROWS_AS(stratified_split(ds, 0.5, 0), DataError);
    ds.samples.push_back(make_sample(1, 4, 2, 8));
    CHECK_THROWS_AS(stratified_split(ds, 0.0, 0), ConfigError);
    CHECK_THROWS_AS(stratified_split(ds, 1.0, 0), ConfigError);
    CHECK_NOTHROW(stratified_split(ds, 0.5, 0));
}

TEST_CASE("manifest round trip") {
    const auto dir = temp_dir();
    Dataset ds;
    ds.num_classes = 2;
    ds.class_names = {"alpha", "beta"};
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 3; ++i)
            ds.samples.push_back(make_sample(k, static_cast<uint64_t>(k) * 100 + i));
    const auto manifest = save_dataset(dir, ds);
    const Dataset loaded = load_manifest(manifest);
    REQUIRE(loaded.samples.size() == ds.samples.size());
    CHECK(loaded.num_classes == 2);
    CHECK(loaded.class_names == ds.class_names);
    for (size_t i = 0; i < ds.samples.size(); ++i) {
        CHECK(loaded.samples[i].label == ds.samples[i].label);
        for (size_t e = 0; e < ds.samples[i].sensors.size(); ++e) {
            const double a = ds.samples[i].sensors.data()[e];
            const double b = loaded.samples[i].sensors.data()[e];
            CHECK(std::abs(a - b) <= 1e-8 * std::max(1.0, std::abs(a)));
        }
    }
}

TEST_CASE("label vector helpers") {
    const LabelVector v = LabelVector::one_hot(2, 7);
    CHECK(v.is_one_hot());
    CHECK(v.is_distribution());
    CHECK(v.argmax() == 2);
    LabelVector soft;
    soft.probs = {0.5, 0.25, 0.25};
    CHECK(!soft.is_one_hot());
    CHECK(soft.is_distribution());
    CHECK(soft.argmax() == 0);
    CHECK_THROWS_AS(LabelVector::one_hot(7, 7), ConfigError);
}

TEST_CASE("validate_sample rejects non-finite values and bad shapes") {
    ResponseSample s = make_sample(0, 9);
    CHECK_NOTHROW(validate_sample(s));
    s.sensors.at(3, 7) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(validate_sample(s), DataError);
    const ResponseSample small = make_sample(0, 9, 4, 10);
    CHECK_THROWS_AS(validate_sample(small), DimensionError);
    CHECK_NOTHROW(validate_sample(small, 4, 10));
}
