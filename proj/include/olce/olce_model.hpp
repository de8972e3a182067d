// Copyright 2026 The olce authors
// The odor-labeling convolutional encoder-decoder: a two-conv encoder
// whose softmax bottleneck carries the class probabilities, mirrored by
// a transposed-conv decoder that reconstructs the input from them.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include <filesystem>

#include "olce/neuralcore.hpp"
#include "olce/signalio.hpp"

namespace olce {

/// Fixed layer geometry. Defaults walk the chain
/// 10x1x120 -> 7x1x116 -> 7x1x58 -> 12x1x56 -> 12x1x28 -> 336 -> 7
/// and back out symmetrically.
struct OlceArch {
    int channels = kDefaultChannels;
    int length   = kDefaultLength;
    int classes  = 7;
    int conv1_filters = 7;
    int conv1_kernel  = 5;
    int conv2_filters = 12;
    int conv2_kernel  = 3;
    int pool = 2;

    int pooled1_length() const { return (length - conv1_kernel + 1) / pool; }
    int pooled2_length() const { return (pooled1_length() - conv2_kernel + 1) / pool; }
    int flat_features() const { return conv2_filters * pooled2_length(); }
};

struct TrainConfig {
    int epochs = 200;
    int batch_size = 16;
    double lr = 1e-3;
    double lambda_recon = 1.0;
    uint64_t seed = 0;

    void validate() const;
};

/// Per-epoch mean training losses.
struct TrainLog {
    std::vector<double> ce;
    std::vector<double> mse;
};

class OlceModel {
public:
    /// Fresh network with seeded initialization.
    OlceModel(const OlceArch& arch, uint64_t init_seed);
    explicit OlceModel(const OlceArch& arch, Sequential net);

    const OlceArch& arch() const { return arch_; }
    const Sequential& net() const { return net_; }
    size_t bottleneck_index() const { return bottleneck_idx_; }

    /// Soft class probabilities from a normalized sample.
    LabelVector encode(const Tensor3& x) const;
    /// Reconstruction from a probability (or one-hot) vector.
    Tensor3 decode(const LabelVector& y) const;
    /// argmax of encode; first index on ties.
    int classify(const Tensor3& x) const;

    /// Minimizes CE(encode(x), one_hot) + lambda * MSE(decode(encode(x)), x)
    /// over the training split by mini-batch Adam. Deterministic for a
    /// fixed (dataset, config).
    TrainLog train(const Dataset& ds, const TrainConfig& cfg);

    /// Writes "<id>.orig.csv" / "<id>.decoded.csv" pairs for the given
    /// sample indices (decoded = decode(encode(x))).
    void export_decoded(const Dataset& ds, const std::vector<int>& indices,
                        const std::filesystem::path& out_dir) const;

    void save(const std::filesystem::path& path) const;
    static OlceModel load(const std::filesystem::path& path, const OlceArch& arch = {});

private:
    OlceArch arch_;
    Sequential net_;
    size_t bottleneck_idx_ = 0;

    Tensor3 forward_decoder(const Tensor3& bottleneck) const;
};

/// The encoder stack alone (conv/pool feature extractor + dense softmax
/// head); shared with the CNN-SVM baseline.
Sequential build_encoder(const OlceArch& arch);
Sequential build_olce_network(const OlceArch& arch);

/// Loss specification for gradient-checking the full network.
LossSpec olce_loss_spec(const OlceModel& model, const Tensor3& input,
                        const std::vector<double>& target, double lambda_recon);

/// Full-network gradient check at a screened random point: resamples
/// until no activation boundary lies within 2h and the smallest nonzero
/// parameter gradient clears grad_floor (finite differences cannot
/// resolve gradients below the rounding noise, ~1e-10/h for O(1)
/// losses). The reconstruction term is up-weighted so decoder gradients
/// clear the floor.
GradCheckReport checked_olce_gradcheck(uint64_t seed, double tolerance, double h = 1e-5,
                                       double lambda_recon = 4.0,
                                       double grad_floor = 5e-6,
                                       const OlceArch& arch = {});

} // namespace olce
