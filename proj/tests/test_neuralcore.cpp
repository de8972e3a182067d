// Copyright 2026 The olce authors
//
// Licensed under the Apache License, Version 2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "olce/neuralcore.hpp"

using namespace olce;

namespace {

Tensor3 random_tensor(int channels, int length, uint64_t seed, double lo = -1.0,
                      double hi = 1.0) {
    Rng rng(seed);
    Tensor3 t(channels, length);
    for (size_t i = 0; i < t.size(); ++i)
        t.data()[i] = rng.uniform(lo, hi);
    return t;
}

void randomize_params(Layer& l, uint64_t seed) {
    Rng rng(seed);
    for (double& w : l.weights()) w = rng.uniform(-1.0, 1.0);
    for (double& b : l.bias()) b = rng.uniform(-1.0, 1.0);
}

/// Direct triple-loop product-sum reference for valid stride-1 conv.
Tensor3 conv_reference(const Tensor3& x, const Conv1d& conv) {
    const int lo = x.length() - conv.kernel() + 1;
    Tensor3 out(conv.out_channels(), lo);
    for (int oc = 0; oc < conv.out_channels(); ++oc)
        for (int t = 0; t < lo; ++t) {
            double acc = conv.bias()[oc];
            for (int ic = 0; ic < conv.in_channels(); ++ic)
                for (int k = 0; k < conv.kernel(); ++k)
                    acc += conv.weights()[(static_cast<size_t>(oc) * conv.in_channels() + ic) *
                                              conv.kernel() +
                                          k] *
                           x.at(ic, t + k);
            out.at(oc, t) = acc;
        }
    return out;
}

double inner(const Tensor3& a, const Tensor3& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
        acc += a.data()[i] * b.data()[i];
    return acc;
}

} // namespace

TEST_CASE("conv shape chain: 10x1x120 with 7 kernels of 5 gives 7x1x116") {
    Conv1d conv(7, 10, 5);
    const Tensor3 x = random_tensor(10, 120, 1);
    const Tensor3 y = conv.forward(x);
    CHECK(y.shape() == Shape3{7, 116});
    CHECK(conv.out_shape({10, 120}) == Shape3{7, 116});
    CHECK_THROWS_AS(conv.out_shape({9, 120}), DimensionError);
    CHECK_THROWS_AS(conv.out_shape({10, 4}), DimensionError);
}

TEST_CASE("single-element identity kernel passes the input through") {
    Conv1d conv(1, 1, 1);
    conv.weights()[0] = 1.0;
    conv.bias()[0] = 0.0;
    const Tensor3 x = random_tensor(1, 17, 2);
    CHECK(conv.forward(x) == x);
}

TEST_CASE("conv forward matches the triple-loop reference within 1e-12") {
    for (uint64_t seed = 0; seed < 10; ++seed) {
        Conv1d conv(3, 2, 3);
        randomize_params(conv, 100 + seed);
        const Tensor3 x = random_tensor(2, 9, 200 + seed);
        const Tensor3 got = conv.forward(x);
        const Tensor3 want = conv_reference(x, conv);
        REQUIRE(got.shape() == want.shape());
        for (size_t i = 0; i < got.size(); ++i)
            CHECK(std::abs(got.data()[i] - want.data()[i]) < 1e-12);
    }
}

TEST_CASE("conv backward: zero upstream gradient gives zero gradients") {
    Conv1d conv(3, 2, 3);
    randomize_params(conv, 5);
    const Tensor3 x = random_tensor(2, 9, 6);
    const Tensor3 gout(3, 7, 0.0);
    Tensor3 gx;
    LayerGrads g = conv.make_grads();
    conv.backward(x, gout, gx, &g);
    for (size_t i = 0; i < gx.size(); ++i) CHECK(gx.data()[i] == 0.0);
    for (double v : g.weights) CHECK(v == 0.0);
    for (double v : g.bias) CHECK(v == 0.0);
}

TEST_CASE("conv backward: identity kernel routes the gradient through") {
    Conv1d conv(1, 1, 1);
    conv.weights()[0] = 1.0;
    const Tensor3 x = random_tensor(1, 9, 7);
    const Tensor3 gout = random_tensor(1, 9, 8);
    Tensor3 gx;
    LayerGrads g = conv.make_grads();
    conv.backward(x, gout, gx, &g);
    CHECK(gx == gout);
}

TEST_CASE("maxpool: shapes, values, odd trailing element dropped") {
    MaxPool1d pool(2);
    CHECK(pool.out_shape({7, 116}) == Shape3{7, 58});
    CHECK(pool.out_shape({12, 57}) == Shape3{12, 28});
    CHECK(pool.out_shape({12, 56}) == Shape3{12, 28});

    Tensor3 x(1, 4);
    x.at(0, 0) = 1; x.at(0, 1) = 3; x.at(0, 2) = 2; x.at(0, 3) = 2;
    const Tensor3 y = pool.forward(x);
    CHECK(y.at(0, 0) == 3);
    CHECK(y.at(0, 1) == 2);

    Tensor3 odd(1, 5);
    for (int t = 0; t < 5; ++t) odd.at(0, t) = t;
    CHECK(pool.forward(odd).length() == 2);
}

TEST_CASE("maxpool backward routes to the first maximal index on ties") {
    MaxPool1d pool(2);
    Tensor3 x(1, 4);
    x.at(0, 0) = 2; x.at(0, 1) = 2; x.at(0, 2) = 1; x.at(0, 3) = 5;
    Tensor3 gout(1, 2);
    gout.at(0, 0) = 1.0; gout.at(0, 1) = 1.0;
    Tensor3 gx;
    pool.backward(x, gout, gx, nullptr);
    CHECK(gx.at(0, 0) == 1.0); // tie -> first index
    CHECK(gx.at(0, 1) == 0.0);
    CHECK(gx.at(0, 2) == 0.0);
    CHECK(gx.at(0, 3) == 1.0);
}

TEST_CASE("upsample: repetition, shapes, and pool/upsample composition") {
    Upsample1d up(2);
    CHECK(up.out_shape({12, 28}) == Shape3{12, 56});

    Tensor3 x(1, 2);
    x.at(0, 0) = 3.5; x.at(0, 1) = -1.25;
    const Tensor3 y = up.forward(x);
    CHECK(y.at(0, 0) == 3.5);
    CHECK(y.at(0, 1) == 3.5);
    CHECK(y.at(0, 2) == -1.25);
    CHECK(y.at(0, 3) == -1.25);

    MaxPool1d pool(2);
    for (uint64_t seed = 0; seed < 5; ++seed) {
        const Tensor3 r = random_tensor(3, 11, 300 + seed);
        CHECK(pool.forward(up.forward(r)) == r);
    }
}

TEST_CASE("upsample backward sums each repeated group") {
    Upsample1d up(2);
    const Tensor3 x = random_tensor(1, 3, 9);
    Tensor3 gout(1, 6);
    for (int t = 0; t < 6; ++t) gout.at(0, t) = t + 1;
    Tensor3 gx;
    up.backward(x, gout, gx, nullptr);
    CHECK(gx.at(0, 0) == 3.0);
    CHECK(gx.at(0, 1) == 7.0);
    CHECK(gx.at(0, 2) == 11.0);
}

TEST_CASE("transposed conv shapes match the decoder chain") {
    TransposedConv1d t2(7, 12, 3);
    CHECK(t2.out_shape({12, 56}) == Shape3{7, 58});
    TransposedConv1d t1(10, 7, 5);
    CHECK(t1.out_shape({7, 116}) == Shape3{10, 120});
    CHECK_THROWS_AS(t1.out_shape({6, 116}), DimensionError);
}

TEST_CASE("transposed conv is the adjoint of conv under tied weights") {
    for (uint64_t seed = 0; seed < 8; ++seed) {
        Conv1d conv(4, 3, 5);
        randomize_params(conv, 400 + seed);
        std::fill(conv.bias().begin(), conv.bias().end(), 0.0);

        TransposedConv1d tconv(3, 4, 5);
        // w_t[ic][oc][k] = w[oc][ic][k]
        for (int oc = 0; oc < 4; ++oc)
            for (int ic = 0; ic < 3; ++ic)
                for (int k = 0; k < 5; ++k)
                    tconv.weights()[(static_cast<size_t>(ic) * 4 + oc) * 5 + k] =
                        conv.weights()[(static_cast<size_t>(oc) * 3 + ic) * 5 + k];

        const Tensor3 x = random_tensor(3, 20, 500 + seed);
        const Tensor3 y = random_tensor(4, 16, 600 + seed);
        CHECK(std::abs(inner(conv.forward(x), y) - inner(x, tconv.forward(y))) < 1e-10);
    }
}

TEST_CASE("relu clamps negatives") {
    Relu relu;
    Tensor3 x(1, 3);
    x.at(0, 0) = -1; x.at(0, 1) = 0; x.at(0, 2) = 2;
    const Tensor3 y = relu.forward(x);
    CHECK(y.at(0, 0) == 0);
    CHECK(y.at(0, 1) == 0);
    CHECK(y.at(0, 2) == 2);
}

TEST_CASE("softmax: uniform on equal logits, sums to one, shift invariant") {
    Softmax sm;
    const Tensor3 zeros(7, 1, 0.0);
    const Tensor3 u = sm.forward(zeros);
    for (int c = 0; c < 7; ++c)
        CHECK(u.at(c, 0) == doctest::Approx(1.0 / 7).epsilon(1e-12));

    for (uint64_t seed = 0; seed < 10; ++seed) {
        const Tensor3 z = random_tensor(7, 1, 700 + seed, -5.0, 5.0);
        const Tensor3 p = sm.forward(z);
        double sum = 0.0;
        for (size_t i = 0; i < p.size(); ++i) {
            CHECK(p.data()[i] >= 0.0);
            sum += p.data()[i];
        }
        CHECK(std::abs(sum - 1.0) < 1e-9);

        Tensor3 shifted = z;
        for (size_t i = 0; i < shifted.size(); ++i) shifted.data()[i] += 13.25;
        const Tensor3 p2 = sm.forward(shifted);
        for (size_t i = 0; i < p.size(); ++i)
            CHECK(std::abs(p.data()[i] - p2.data()[i]) < 1e-9);
    }
}

TEST_CASE("fully connected: 12x1x28 flattens to 336 and maps to 7") {
    FullyConnected fc(7, 336);
    randomize_params(fc, 11);
    const Tensor3 x = random_tensor(12, 28, 12);
    const Tensor3 y = fc.forward(x);
    CHECK(y.shape() == Shape3{7, 1});
    CHECK_THROWS_AS(fc.out_shape({12, 29}), DimensionError);
}

TEST_CASE("cross entropy: perfect one-hot prediction is at most 1e-11") {
    Tensor3 pred(7, 1, 0.0);
    pred.at(3, 0) = 1.0;
    const double ce = cross_entropy(pred, {0, 0, 0, 1, 0, 0, 0});
    CHECK(std::abs(ce) <= 1e-11);
    CHECK_THROWS_AS(cross_entropy(pred, {0, 1}), DimensionError);
}

TEST_CASE("mse of identical tensors is zero") {
    const Tensor3 a = random_tensor(3, 9, 13);
    CHECK(mse(a, a) == 0.0);
    Tensor3 b = a;
    b.at(0, 0) += 2.0;
    CHECK(mse(a, b) == doctest::Approx(4.0 / 27));
    CHECK_THROWS_AS(mse(a, random_tensor(3, 8, 13)), DimensionError);
}

TEST_CASE("one adam step on a quadratic decreases the parameter") {
    Sequential net;
    auto& fc = net.add<FullyConnected>(1, 1);
    fc.weights()[0] = 1.0;
    fc.bias()[0] = 0.0;
    AdamOptimizer adam(net, 0.1);
    // f(w) = w^2 evaluated via the layer on input 1; df/dw = 2w.
    std::vector<LayerGrads> grads = net.make_grads();
    grads[0].weights[0] = 2.0 * fc.weights()[0];
    adam.step(net, grads);
    CHECK(fc.weights()[0] < 1.0);
    CHECK(fc.weights()[0] > 0.0);
    CHECK_THROWS_AS(AdamOptimizer(net, 0.0), ConfigError);
}

TEST_CASE("sgd step moves against the gradient") {
    Sequential net;
    auto& fc = net.add<FullyConnected>(1, 1);
    fc.weights()[0] = 1.0;
    SgdOptimizer sgd(0.25);
    std::vector<LayerGrads> grads = net.make_grads();
    grads[0].weights[0] = 2.0;
    sgd.step(net, grads);
    CHECK(fc.weights()[0] == doctest::Approx(0.5));
}

TEST_CASE("checkpoint round trip preserves forward output bitwise") {
    Sequential net;
    net.add<Conv1d>(3, 2, 3);
    net.add<Relu>();
    net.add<MaxPool1d>(2);
    net.add<FullyConnected>(4, 12);
    net.add<Softmax>();
    net.init_params(0);
    const Tensor3 x = random_tensor(2, 10, 14);
    const Tensor3 y = net.forward(x);

    const auto path = std::filesystem::temp_directory_path() / "olce_ckpt_test.json";
    save_checkpoint(path, net);
    const Sequential loaded = load_checkpoint(path);
    CHECK(loaded.forward(x) == y);
    std::filesystem::remove(path);
}

TEST_CASE("seeded initialization is deterministic") {
    Sequential a;
    a.add<Conv1d>(3, 2, 3);
    a.add<FullyConnected>(4, 12);
    a.init_params(77);
    Sequential b;
    b.add<Conv1d>(3, 2, 3);
    b.add<FullyConnected>(4, 12);
    b.init_params(77);
    CHECK(a.layer(0).weights() == b.layer(0).weights());
    CHECK(a.layer(1).weights() == b.layer(1).weights());
    Sequential c;
    c.add<Conv1d>(3, 2, 3);
    c.add<FullyConnected>(4, 12);
    c.init_params(78);
    CHECK(a.layer(0).weights() != c.layer(0).weights());
}

TEST_CASE("shape algebra: declared output shapes match computed ones") {
    Rng rng(15);
    for (int rep = 0; rep < 40; ++rep) {
        const int ic = 1 + rng.below(6);
        const int oc = 1 + rng.below(6);
        const int k = 1 + rng.below(5);
        const int len = k + rng.below(30);
        const Tensor3 x = random_tensor(ic, len, 1000 + rep);

        Conv1d conv(oc, ic, k);
        CHECK(conv.forward(x).shape() == conv.out_shape(x.shape()));
        TransposedConv1d tconv(oc, ic, k);
        CHECK(tconv.forward(x).shape() == tconv.out_shape(x.shape()));
        MaxPool1d pool(1 + rng.below(3));
        if (pool.out_shape(x.shape()).length > 0)
            CHECK(pool.forward(x).shape() == pool.out_shape(x.shape()));
        Upsample1d up(1 + rng.below(3));
        CHECK(up.forward(x).shape() == up.out_shape(x.shape()));
        Relu relu;
        CHECK(relu.forward(x).shape() == x.shape());
    }
}
