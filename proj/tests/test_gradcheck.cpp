// Copyright 2026 The olce authors
//
// Licensed under the Apache License, Version 2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "olce/baselines.hpp"
#include "olce/olce_model.hpp"

using namespace olce;

namespace {

/// Inputs with magnitudes bounded away from zero keep finite differences
/// well conditioned.
Tensor3 sample_input(int channels, int length, uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    Tensor3 x(channels, length);
    for (size_t i = 0; i < x.size(); ++i)
        x.data()[i] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 1.5) * scale;
    return x;
}

LossSpec weighted_sum_loss(const Tensor3& coeffs, int layer_index) {
    LossSpec loss;
    loss.value = [&coeffs, layer_index](const CacheAccess& at) {
        const Tensor3& out = at(layer_index);
        double acc = 0.0;
        for (size_t i = 0; i < out.size(); ++i)
            acc += coeffs.data()[i] * out.data()[i];
        return acc;
    };
    loss.grad = [&coeffs, layer_index](const CacheAccess&, Tensor3& gf,
                                       std::map<size_t, Tensor3>&) {
        gf = coeffs;
    };
    return loss;
}

LossSpec ce_loss(const std::vector<double>& target, int layer_index) {
    LossSpec loss;
    loss.value = [&target, layer_index](const CacheAccess& at) {
        return cross_entropy(at(layer_index), target);
    };
    loss.grad = [&target, layer_index](const CacheAccess& at, Tensor3& gf,
                                       std::map<size_t, Tensor3>&) {
        cross_entropy_grad(at(layer_index), target, gf);
    };
    return loss;
}

} // namespace

TEST_CASE("single conv layer gradients match finite differences") {
    Sequential net;
    net.add<Conv1d>(3, 2, 3);
    net.init_params(1);
    const Tensor3 x = sample_input(2, 9, 2);
    const Tensor3 coeffs = sample_input(3, 7, 3);
    const auto report = grad_check(net, x, weighted_sum_loss(coeffs, 0), 1e-6);
    CHECK(report.pass);
}

TEST_CASE("single transposed conv layer gradients match finite differences") {
    Sequential net;
    net.add<TransposedConv1d>(2, 3, 4);
    net.init_params(4);
    const Tensor3 x = sample_input(3, 6, 5);
    const Tensor3 coeffs = sample_input(2, 9, 6);
    const auto report = grad_check(net, x, weighted_sum_loss(coeffs, 0), 1e-6);
    CHECK(report.pass);
}

TEST_CASE("maxpool and upsample backward match finite differences") {
    Sequential net;
    net.add<Conv1d>(2, 2, 3);
    net.add<MaxPool1d>(2);
    net.add<Upsample1d>(2);
    net.init_params(7);
    const Tensor3 x = sample_input(2, 12, 8);
    const Tensor3 coeffs = sample_input(2, 10, 9);
    const auto report = grad_check(net, x, weighted_sum_loss(coeffs, 2), 1e-5);
    CHECK(report.pass);
}

TEST_CASE("linear-only network: finite differences are exact to 1e-9") {
    Sequential net;
    net.add<FullyConnected>(6, 8);
    net.add<FullyConnected>(3, 6);
    net.init_params(10);
    const Tensor3 x = sample_input(8, 1, 11);
    const Tensor3 coeffs = sample_input(3, 1, 12);
    // Linear map + linear functional: no truncation error, so a larger
    // step keeps rounding noise small too.
    const auto report = grad_check(net, x, weighted_sum_loss(coeffs, 1), 1e-9, 1e-2);
    CHECK(report.pass);
}

TEST_CASE("tolerance zero reports a failure") {
    Sequential net;
    net.add<FullyConnected>(2, 3);
    net.init_params(13);
    const Tensor3 x = sample_input(3, 1, 14);
    const Tensor3 coeffs = sample_input(2, 1, 15);
    const auto report = grad_check(net, x, weighted_sum_loss(coeffs, 0), 0.0, 1e-5);
    CHECK(!report.pass);
    CHECK(report.max_rel_error >= 0.0);
    CHECK(!report.worst_location.empty());
}

TEST_CASE("small relu MLP with cross entropy passes at 1e-4") {
    Sequential net = MlpClassifier::build_network(20, 4, {12, 8});
    for (uint64_t attempt = 0;; ++attempt) {
        net.init_params(Rng::derive(16, attempt));
        const Tensor3 x = sample_input(20, 1, 17 + attempt);
        if (near_activation_boundary(net, x, 1e-4) && attempt < 32) continue;
        const std::vector<double> target = {0, 0, 1, 0};
        const auto report =
            grad_check(net, x, ce_loss(target, static_cast<int>(net.size()) - 1), 1e-4);
        CHECK(report.pass);
        CHECK(report.max_rel_error < 1e-4);
        break;
    }
}

TEST_CASE("full encoder-decoder joint objective passes at 1e-4") {
    OlceArch arch;
    arch.channels = 4;
    arch.length = 40;
    arch.classes = 3;
    arch.conv1_filters = 3;
    arch.conv2_filters = 5;
    for (uint64_t attempt = 0;; ++attempt) {
        OlceModel model(arch, Rng::derive(18, attempt));
        const Tensor3 x = sample_input(arch.channels, arch.length, 19 + attempt, 0.5);
        if (near_activation_boundary(model.net(), x, 1e-4) && attempt < 32) continue;
        std::vector<double> target(arch.classes, 0.0);
        target[1] = 1.0;
        const auto report =
            grad_check(model.net(), x, olce_loss_spec(model, x, target, 1.0), 1e-4);
        CHECK(report.pass);
        CHECK(report.max_rel_error < 1e-4);
        break;
    }
}

TEST_CASE("boundary detector flags near-ties and near-zero relu inputs") {
    Sequential net;
    net.add<Relu>();
    Tensor3 x(1, 3);
    x.at(0, 0) = 1.0; x.at(0, 1) = -1.0; x.at(0, 2) = 1e-9;
    CHECK(near_activation_boundary(net, x, 1e-6));
    x.at(0, 2) = 0.5;
    CHECK(!near_activation_boundary(net, x, 1e-6));

    Sequential pool_net;
    pool_net.add<MaxPool1d>(2);
    Tensor3 p(1, 4);
    p.at(0, 0) = 1.0; p.at(0, 1) = 1.0 + 1e-9; p.at(0, 2) = 0.0; p.at(0, 3) = 2.0;
    CHECK(near_activation_boundary(pool_net, p, 1e-6));
    p.at(0, 1) = 2.0;
    CHECK(!near_activation_boundary(pool_net, p, 1e-6));
}
