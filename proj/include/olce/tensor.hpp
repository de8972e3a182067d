// Copyright 2026 The olce authors
// Dense rank-3 signal/activation carrier (channels x 1 x length).
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "olce/errors.hpp"

namespace olce {

struct Shape3 {
    int channels = 0;
    int length   = 0;

    std::array<int, 3> dims() const { return {channels, 1, length}; }
    int size() const { return channels * length; }
    bool operator==(const Shape3&) const = default;
    std::string str() const {
        return std::to_string(channels) + "x1x" + std::to_string(length);
    }
};

/// Contiguous row-major (channel, length) tensor of doubles. The middle
/// dimension is always 1; it is kept in the shape only so layer tables
/// read naturally (e.g. 10x1x120).
class Tensor3 {
public:
    Tensor3() = default;
    Tensor3(int channels, int length, double fill = 0.0)
        : channels_(channels), length_(length),
          data_(static_cast<size_t>(channels) * length, fill) {
        if (channels <= 0 || length <= 0)
            throw DimensionError("tensor dims must be positive, got " +
                                 Shape3{channels, length}.str());
    }

    int channels() const { return channels_; }
    int length() const { return length_; }
    Shape3 shape() const { return {channels_, length_}; }
    size_t size() const { return data_.size(); }

    double& at(int c, int t) { return data_[static_cast<size_t>(c) * length_ + t]; }
    double at(int c, int t) const { return data_[static_cast<size_t>(c) * length_ + t]; }

    double* row(int c) { return data_.data() + static_cast<size_t>(c) * length_; }
    const double* row(int c) const { return data_.data() + static_cast<size_t>(c) * length_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    const std::vector<double>& values() const { return data_; }
    std::vector<double>& values() { return data_; }

    /// Reshape in place keeping capacity; element count may change.
    void resize(int channels, int length) {
        channels_ = channels;
        length_   = length;
        data_.resize(static_cast<size_t>(channels) * length);
    }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool operator==(const Tensor3&) const = default;

private:
    int channels_ = 0;
    int length_   = 0;
    std::vector<double> data_;
};

inline void require_shape(const Tensor3& t, int channels, int length, const char* what) {
    if (t.channels() != channels || t.length() != length)
        throw DimensionError(std::string(what) + ": expected " +
                             Shape3{channels, length}.str() + ", found " + t.shape().str());
}

} // namespace olce
