// Copyright 2026 The olce authors
//
// Licensed under the Apache License, Version 2.0

#include "olce/neuralcore.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace olce {

// --- Layer base ------------------------------------------------------------

void Layer::perturbed_forward(const Tensor3&, const Tensor3&, size_t, double, Tensor3&) const {
    throw ConfigError(std::string("perturbed_forward not available for layer kind '") +
                      kind() + "'");
}

nlohmann::ordered_json Layer::config_json() const {
    return {{"kind", kind()}};
}

namespace {

void glorot_uniform(std::vector<double>& w, int fan_in, int fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& v : w) v = rng.uniform(-limit, limit);
}

nlohmann::ordered_json params_json(const Layer& l) {
    nlohmann::ordered_json j;
    j["weights"] = l.weights();
    j["bias"] = l.bias();
    return j;
}

} // namespace

// --- Conv1d ----------------------------------------------------------------

Conv1d::Conv1d(int out_channels, int in_channels, int kernel)
    : oc_(out_channels), ic_(in_channels), k_(kernel) {
    if (oc_ <= 0 || ic_ <= 0 || k_ <= 0)
        throw DimensionError("conv: all dims must be positive");
    w_.assign(static_cast<size_t>(oc_) * ic_ * k_, 0.0);
    b_.assign(oc_, 0.0);
}

Shape3 Conv1d::out_shape(const Shape3& in) const {
    if (in.channels != ic_)
        throw DimensionError("conv: expected " + std::to_string(ic_) +
                             " input channels, found " + std::to_string(in.channels));
    if (in.length < k_)
        throw DimensionError("conv: input length " + std::to_string(in.length) +
                             " shorter than kernel " + std::to_string(k_));
    return {oc_, in.length - k_ + 1};
}

void Conv1d::forward_to(const Tensor3& x, Tensor3& out) const {
    const Shape3 os = out_shape(x.shape());
    out.resize(os.channels, os.length);
    const int lo = os.length;
    for (int oc = 0; oc < oc_; ++oc) {
        double* orow = out.row(oc);
        std::fill(orow, orow + lo, b_[oc]);
        const double* wrow = &w_[static_cast<size_t>(oc) * ic_ * k_];
        for (int ic = 0; ic < ic_; ++ic) {
            const double* xrow = x.row(ic);
            for (int kk = 0; kk < k_; ++kk) {
                const double wv = wrow[ic * k_ + kk];
                const double* xs = xrow + kk;
                for (int t = 0; t < lo; ++t)
                    orow[t] += wv * xs[t];
            }
        }
    }
}

void Conv1d::backward(const Tensor3& x, const Tensor3& grad_out,
                      Tensor3& grad_x, LayerGrads* g) const {
    const int lo = grad_out.length();
    grad_x.resize(x.channels(), x.length());
    grad_x.fill(0.0);
    for (int oc = 0; oc < oc_; ++oc) {
        const double* grow = grad_out.row(oc);
        if (g) {
            double acc = 0.0;
            for (int t = 0; t < lo; ++t) acc += grow[t];
            g->bias[oc] += acc;
        }
        const double* wrow = &w_[static_cast<size_t>(oc) * ic_ * k_];
        for (int ic = 0; ic < ic_; ++ic) {
            const double* xrow = x.row(ic);
            double* gxrow = grad_x.row(ic);
            for (int kk = 0; kk < k_; ++kk) {
                const double wv = wrow[ic * k_ + kk];
                double wacc = 0.0;
                const double* xs = xrow + kk;
                double* gxs = gxrow + kk;
                for (int t = 0; t < lo; ++t) {
                    wacc += grow[t] * xs[t];
                    gxs[t] += wv * grow[t];
                }
                if (g) g->weights[static_cast<size_t>(oc) * ic_ * k_ + ic * k_ + kk] += wacc;
            }
        }
    }
}

void Conv1d::perturbed_forward(const Tensor3& x, const Tensor3& base_out,
                               size_t idx, double delta, Tensor3& out) const {
    out = base_out;
    const int lo = base_out.length();
    if (idx < w_.size()) {
        const int oc = static_cast<int>(idx / (static_cast<size_t>(ic_) * k_));
        const size_t rem = idx % (static_cast<size_t>(ic_) * k_);
        const int ic = static_cast<int>(rem / k_);
        const int kk = static_cast<int>(rem % k_);
        double* orow = out.row(oc);
        const double* xs = x.row(ic) + kk;
        for (int t = 0; t < lo; ++t)
            orow[t] += delta * xs[t];
    } else {
        double* orow = out.row(static_cast<int>(idx - w_.size()));
        for (int t = 0; t < lo; ++t)
            orow[t] += delta;
    }
}

void Conv1d::init_params(Rng& rng) {
    glorot_uniform(w_, ic_ * k_, oc_ * k_, rng);
    std::fill(b_.begin(), b_.end(), 0.0);
}

nlohmann::ordered_json Conv1d::config_json() const {
    nlohmann::ordered_json j{{"kind", kind()},
                             {"out_channels", oc_},
                             {"in_channels", ic_},
                             {"kernel", k_}};
    j.update(params_json(*this));
    return j;
}

// --- TransposedConv1d --------------------------------------------------------

TransposedConv1d::TransposedConv1d(int out_channels, int in_channels, int kernel)
    : oc_(out_channels), ic_(in_channels), k_(kernel) {
    if (oc_ <= 0 || ic_ <= 0 || k_ <= 0)
        throw DimensionError("transposed_conv: all dims must be positive");
    w_.assign(static_cast<size_t>(oc_) * ic_ * k_, 0.0);
    b_.assign(oc_, 0.0);
}

Shape3 TransposedConv1d::out_shape(const Shape3& in) const {
    if (in.channels != ic_)
        throw DimensionError("transposed_conv: expected " + std::to_string(ic_) +
                             " input channels, found " + std::to_string(in.channels));
    return {oc_, in.length + k_ - 1};
}

void TransposedConv1d::forward_to(const Tensor3& x, Tensor3& out) const {
    const Shape3 os = out_shape(x.shape());
    out.resize(os.channels, os.length);
    const int li = x.length();
    for (int oc = 0; oc < oc_; ++oc) {
        double* orow = out.row(oc);
        std::fill(orow, orow + os.length, b_[oc]);
        const double* wrow = &w_[static_cast<size_t>(oc) * ic_ * k_];
        for (int ic = 0; ic < ic_; ++ic) {
            const double* xrow = x.row(ic);
            for (int kk = 0; kk < k_; ++kk) {
                const double wv = wrow[ic * k_ + kk];
                double* os_ = orow + kk;
                for (int t = 0; t < li; ++t)
                    os_[t] += wv * xrow[t];
            }
        }
    }
}

void TransposedConv1d::backward(const Tensor3& x, const Tensor3& grad_out,
                                Tensor3& grad_x, LayerGrads* g) const {
    const int li = x.length();
    const int lo = grad_out.length();
    grad_x.resize(x.channels(), x.length());
    grad_x.fill(0.0);
    for (int oc = 0; oc < oc_; ++oc) {
        const double* grow = grad_out.row(oc);
        if (g) {
            double acc = 0.0;
            for (int t = 0; t < lo; ++t) acc += grow[t];
            g->bias[oc] += acc;
        }
        const double* wrow = &w_[static_cast<size_t>(oc) * ic_ * k_];
        for (int ic = 0; ic < ic_; ++ic) {
            const double* xrow = x.row(ic);
            double* gxrow = grad_x.row(ic);
            for (int kk = 0; kk < k_; ++kk) {
                const double wv = wrow[ic * k_ + kk];
                const double* gs = grow + kk;
                double wacc = 0.0;
                for (int t = 0; t < li; ++t) {
                    wacc += gs[t] * xrow[t];
                    gxrow[t] += wv * gs[t];
                }
                if (g) g->weights[static_cast<size_t>(oc) * ic_ * k_ + ic * k_ + kk] += wacc;
            }
        }
    }
}

void TransposedConv1d::perturbed_forward(const Tensor3& x, const Tensor3& base_out,
                                         size_t idx, double delta, Tensor3& out) const {
    out = base_out;
    const int li = x.length();
    if (idx < w_.size()) {
        const int oc = static_cast<int>(idx / (static_cast<size_t>(ic_) * k_));
        const size_t rem = idx % (static_cast<size_t>(ic_) * k_);
        const int ic = static_cast<int>(rem / k_);
        const int kk = static_cast<int>(rem % k_);
        double* os_ = out.row(oc) + kk;
        const double* xrow = x.row(ic);
        for (int t = 0; t < li; ++t)
            os_[t] += delta * xrow[t];
    } else {
        double* orow = out.row(static_cast<int>(idx - w_.size()));
        for (int t = 0; t < out.length(); ++t)
            orow[t] += delta;
    }
}

void TransposedConv1d::init_params(Rng& rng) {
    glorot_uniform(w_, ic_ * k_, oc_ * k_, rng);
    std::fill(b_.begin(), b_.end(), 0.0);
}

nlohmann::ordered_json TransposedConv1d::config_json() const {
    nlohmann::ordered_json j{{"kind", kind()},
                             {"out_channels", oc_},
                             {"in_channels", ic_},
                             {"kernel", k_}};
    j.update(params_json(*this));
    return j;
}

// --- FullyConnected ----------------------------------------------------------

FullyConnected::FullyConnected(int out_features, int in_features)
    : of_(out_features), if_(in_features) {
    if (of_ <= 0 || if_ <= 0)
        throw DimensionError("fully_connected: dims must be positive");
    w_.assign(static_cast<size_t>(of_) * if_, 0.0);
    b_.assign(of_, 0.0);
}

Shape3 FullyConnected::out_shape(const Shape3& in) const {
    if (in.size() != if_)
        throw DimensionError("fully_connected: expected flattened input of " +
                             std::to_string(if_) + ", found " + std::to_string(in.size()) +
                             " (" + in.str() + ")");
    return {of_, 1};
}

void FullyConnected::forward_to(const Tensor3& x, Tensor3& out) const {
    out_shape(x.shape());
    out.resize(of_, 1);
    const double* flat = x.data();
    for (int o = 0; o < of_; ++o) {
        const double* wrow = &w_[static_cast<size_t>(o) * if_];
        double acc = b_[o];
        for (int i = 0; i < if_; ++i)
            acc += wrow[i] * flat[i];
        out.at(o, 0) = acc;
    }
}

void FullyConnected::backward(const Tensor3& x, const Tensor3& grad_out,
                              Tensor3& grad_x, LayerGrads* g) const {
    const double* flat = x.data();
    grad_x.resize(x.channels(), x.length());
    grad_x.fill(0.0);
    double* gx = grad_x.data();
    for (int o = 0; o < of_; ++o) {
        const double go = grad_out.at(o, 0);
        const double* wrow = &w_[static_cast<size_t>(o) * if_];
        if (g) {
            g->bias[o] += go;
            double* gw = &g->weights[static_cast<size_t>(o) * if_];
            for (int i = 0; i < if_; ++i) {
                gw[i] += go * flat[i];
                gx[i] += wrow[i] * go;
            }
        } else {
            for (int i = 0; i < if_; ++i)
                gx[i] += wrow[i] * go;
        }
    }
}

void FullyConnected::perturbed_forward(const Tensor3& x, const Tensor3& base_out,
                                       size_t idx, double delta, Tensor3& out) const {
    out = base_out;
    if (idx < w_.size()) {
        const int o = static_cast<int>(idx / if_);
        const int i = static_cast<int>(idx % if_);
        out.at(o, 0) += delta * x.data()[i];
    } else {
        out.at(static_cast<int>(idx - w_.size()), 0) += delta;
    }
}

void FullyConnected::init_params(Rng& rng) {
    glorot_uniform(w_, if_, of_, rng);
    std::fill(b_.begin(), b_.end(), 0.0);
}

nlohmann::ordered_json FullyConnected::config_json() const {
    nlohmann::ordered_json j{{"kind", kind()},
                             {"out_features", of_},
                             {"in_features", if_}};
    j.update(params_json(*this));
    return j;
}

// --- Relu ---------------------------------------------------------------

void Relu::forward_to(const Tensor3& x, Tensor3& out) const {
    out.resize(x.channels(), x.length());
    const double* src = x.data();
    double* dst = out.data();
    for (size_t i = 0; i < x.size(); ++i)
        dst[i] = src[i] > 0.0 ? src[i] : 0.0;
}

void Relu::backward(const Tensor3& x, const Tensor3& grad_out,
                    Tensor3& grad_x, LayerGrads*) const {
    grad_x.resize(x.channels(), x.length());
    const double* src = x.data();
    const double* go = grad_out.data();
    double* gx = grad_x.data();
    for (size_t i = 0; i < x.size(); ++i)
        gx[i] = src[i] > 0.0 ? go[i] : 0.0;
}

// --- MaxPool1d ----------------------------------------------------------

MaxPool1d::MaxPool1d(int window) : window_(window) {
    if (window_ < 1)
        throw DimensionError("maxpool: window must be >= 1");
}

Shape3 MaxPool1d::out_shape(const Shape3& in) const {
    return {in.channels, in.length / window_};
}

void MaxPool1d::forward_to(const Tensor3& x, Tensor3& out) const {
    const Shape3 os = out_shape(x.shape());
    out.resize(os.channels, os.length);
    for (int c = 0; c < x.channels(); ++c) {
        const double* xrow = x.row(c);
        double* orow = out.row(c);
        for (int t = 0; t < os.length; ++t) {
            double m = xrow[t * window_];
            for (int w = 1; w < window_; ++w)
                m = std::max(m, xrow[t * window_ + w]);
            orow[t] = m;
        }
    }
}

void MaxPool1d::backward(const Tensor3& x, const Tensor3& grad_out,
                         Tensor3& grad_x, LayerGrads*) const {
    grad_x.resize(x.channels(), x.length());
    grad_x.fill(0.0);
    const int lo = grad_out.length();
    for (int c = 0; c < x.channels(); ++c) {
        const double* xrow = x.row(c);
        const double* grow = grad_out.row(c);
        double* gxrow = grad_x.row(c);
        for (int t = 0; t < lo; ++t) {
            int best = t * window_;
            for (int w = 1; w < window_; ++w)
                if (xrow[t * window_ + w] > xrow[best])
                    best = t * window_ + w;
            gxrow[best] += grow[t];
        }
    }
}

nlohmann::ordered_json MaxPool1d::config_json() const {
    return {{"kind", kind()}, {"window", window_}};
}

// --- Upsample1d ----------------------------------------------------------

Upsample1d::Upsample1d(int factor) : factor_(factor) {
    if (factor_ < 1)
        throw DimensionError("upsample: factor must be >= 1");
}

Shape3 Upsample1d::out_shape(const Shape3& in) const {
    return {in.channels, in.length * factor_};
}

void Upsample1d::forward_to(const Tensor3& x, Tensor3& out) const {
    out.resize(x.channels(), x.length() * factor_);
    for (int c = 0; c < x.channels(); ++c) {
        const double* xrow = x.row(c);
        double* orow = out.row(c);
        for (int t = 0; t < x.length(); ++t)
            for (int f = 0; f < factor_; ++f)
                orow[t * factor_ + f] = xrow[t];
    }
}

void Upsample1d::backward(const Tensor3& x, const Tensor3& grad_out,
                          Tensor3& grad_x, LayerGrads*) const {
    grad_x.resize(x.channels(), x.length());
    for (int c = 0; c < x.channels(); ++c) {
        const double* grow = grad_out.row(c);
        double* gxrow = grad_x.row(c);
        for (int t = 0; t < x.length(); ++t) {
            double acc = 0.0;
            for (int f = 0; f < factor_; ++f)
                acc += grow[t * factor_ + f];
            gxrow[t] = acc;
        }
    }
}

nlohmann::ordered_json Upsample1d::config_json() const {
    return {{"kind", kind()}, {"factor", factor_}};
}

// --- Reshape -------------------------------------------------------------

Reshape::Reshape(int channels, int length) : channels_(channels), length_(length) {
    if (channels_ <= 0 || length_ <= 0)
        throw DimensionError("reshape: dims must be positive");
}

Shape3 Reshape::out_shape(const Shape3& in) const {
    if (in.size() != channels_ * length_)
        throw DimensionError("reshape: expected " + std::to_string(channels_ * length_) +
                             " elements, found " + std::to_string(in.size()));
    return {channels_, length_};
}

void Reshape::forward_to(const Tensor3& x, Tensor3& out) const {
    out_shape(x.shape());
    out.resize(channels_, length_);
    std::copy(x.data(), x.data() + x.size(), out.data());
}

void Reshape::backward(const Tensor3& x, const Tensor3& grad_out,
                       Tensor3& grad_x, LayerGrads*) const {
    grad_x.resize(x.channels(), x.length());
    std::copy(grad_out.data(), grad_out.data() + grad_out.size(), grad_x.data());
}

nlohmann::ordered_json Reshape::config_json() const {
    return {{"kind", kind()}, {"channels", channels_}, {"length", length_}};
}

// --- Softmax -------------------------------------------------------------

void Softmax::forward_to(const Tensor3& x, Tensor3& out) const {
    out.resize(x.channels(), x.length());
    const double* src = x.data();
    double* dst = out.data();
    double mx = src[0];
    for (size_t i = 1; i < x.size(); ++i) mx = std::max(mx, src[i]);
    double sum = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        dst[i] = std::exp(src[i] - mx);
        sum += dst[i];
    }
    const double inv = 1.0 / sum;
    for (size_t i = 0; i < x.size(); ++i) dst[i] *= inv;
}

void Softmax::backward(const Tensor3& x, const Tensor3& grad_out,
                       Tensor3& grad_x, LayerGrads*) const {
    // dL/dz = y * (g - <g, y>) with y = softmax(z)
    Tensor3 y;
    forward_to(x, y);
    grad_x.resize(x.channels(), x.length());
    const double* yv = y.data();
    const double* go = grad_out.data();
    double dot = 0.0;
    for (size_t i = 0; i < x.size(); ++i) dot += go[i] * yv[i];
    double* gx = grad_x.data();
    for (size_t i = 0; i < x.size(); ++i)
        gx[i] = yv[i] * (go[i] - dot);
}

// --- Sequential -----------------------------------------------------------

void Sequential::init_params(uint64_t seed) {
    for (size_t i = 0; i < layers_.size(); ++i) {
        Rng rng(Rng::derive(seed, 0x494e4954ULL, i));
        layers_[i]->init_params(rng);
    }
}

namespace {

// Checked builds screen every layer output for non-finite values.
inline void checked_finite([[maybe_unused]] const Tensor3& t,
                           [[maybe_unused]] const char* kind) {
#ifdef OLCE_CHECKED
    if (!t.all_finite())
        throw NumericError(std::string("non-finite value after layer '") + kind + "'");
#endif
}

} // namespace

Tensor3 Sequential::forward(const Tensor3& x) const {
    Tensor3 cur = x;
    Tensor3 next;
    for (const auto& l : layers_) {
        l->forward_to(cur, next);
        checked_finite(next, l->kind());
        std::swap(cur, next);
    }
    return cur;
}

void Sequential::forward_cache(const Tensor3& x, std::vector<Tensor3>& cache) const {
    cache.resize(layers_.size());
    const Tensor3* cur = &x;
    for (size_t i = 0; i < layers_.size(); ++i) {
        layers_[i]->forward_to(*cur, cache[i]);
        checked_finite(cache[i], layers_[i]->kind());
        cur = &cache[i];
    }
}

void Sequential::backward(const Tensor3& x, const std::vector<Tensor3>& cache,
                          const Tensor3& grad_final,
                          const std::map<size_t, Tensor3>& injected,
                          std::vector<LayerGrads>& grads, Tensor3* grad_input) const {
    Tensor3 g = grad_final;
    Tensor3 g_below;
    for (size_t i = layers_.size(); i-- > 0;) {
        if (auto it = injected.find(i); it != injected.end()) {
            if (it->second.shape() != g.shape())
                throw DimensionError("injected gradient shape " + it->second.shape().str() +
                                     " does not match layer output " + g.shape().str());
            const double* add = it->second.data();
            double* dst = g.data();
            for (size_t e = 0; e < g.size(); ++e) dst[e] += add[e];
        }
        const Tensor3& in = (i == 0) ? x : cache[i - 1];
        layers_[i]->backward(in, g, g_below, &grads[i]);
        std::swap(g, g_below);
    }
    if (grad_input) *grad_input = std::move(g);
}

std::vector<LayerGrads> Sequential::make_grads() const {
    std::vector<LayerGrads> g;
    g.reserve(layers_.size());
    for (const auto& l : layers_) g.push_back(l->make_grads());
    return g;
}

size_t Sequential::total_params() const {
    size_t n = 0;
    for (const auto& l : layers_) n += l->param_count();
    return n;
}

nlohmann::ordered_json Sequential::to_json() const {
    nlohmann::ordered_json layers = nlohmann::ordered_json::array();
    for (const auto& l : layers_) layers.push_back(l->config_json());
    return {{"format", "olce-checkpoint"}, {"version", 1}, {"layers", layers}};
}

namespace {

void load_params(Layer& l, const nlohmann::ordered_json& j) {
    auto w = j.at("weights").get<std::vector<double>>();
    auto b = j.at("bias").get<std::vector<double>>();
    if (w.size() != l.weights().size() || b.size() != l.bias().size())
        throw ParseError(std::string("checkpoint parameter count mismatch for layer '") +
                         l.kind() + "'");
    l.weights() = std::move(w);
    l.bias() = std::move(b);
}

} // namespace

Sequential Sequential::from_json(const nlohmann::ordered_json& j) {
    if (j.value("format", "") != "olce-checkpoint")
        throw ParseError("not an olce checkpoint (missing format tag)");
    if (j.value("version", 0) != 1)
        throw ParseError("unsupported checkpoint version " +
                         std::to_string(j.value("version", 0)));
    Sequential net;
    for (const auto& lj : j.at("layers")) {
        const std::string kind = lj.at("kind").get<std::string>();
        if (kind == "conv") {
            auto& l = net.add<Conv1d>(lj.at("out_channels").get<int>(),
                                      lj.at("in_channels").get<int>(),
                                      lj.at("kernel").get<int>());
            load_params(l, lj);
        } else if (kind == "transposed_conv") {
            auto& l = net.add<TransposedConv1d>(lj.at("out_channels").get<int>(),
                                                lj.at("in_channels").get<int>(),
                                                lj.at("kernel").get<int>());
            load_params(l, lj);
        } else if (kind == "fully_connected") {
            auto& l = net.add<FullyConnected>(lj.at("out_features").get<int>(),
                                              lj.at("in_features").get<int>());
            load_params(l, lj);
        } else if (kind == "relu") {
            net.add<Relu>();
        } else if (kind == "maxpool") {
            net.add<MaxPool1d>(lj.at("window").get<int>());
        } else if (kind == "upsample") {
            net.add<Upsample1d>(lj.at("factor").get<int>());
        } else if (kind == "reshape") {
            net.add<Reshape>(lj.at("channels").get<int>(), lj.at("length").get<int>());
        } else if (kind == "softmax") {
            net.add<Softmax>();
        } else {
            throw ParseError("unknown layer kind in checkpoint: '" + kind + "'");
        }
    }
    return net;
}

void save_checkpoint(const std::filesystem::path& path, const Sequential& net) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write checkpoint: " + path.string());
    out << net.to_json().dump(2) << '\n';
}

Sequential load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open checkpoint: " + path.string());
    nlohmann::ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ParseError("checkpoint " + path.string() + ": " + e.what());
    }
    return Sequential::from_json(j);
}

// --- losses ---------------------------------------------------------------

double cross_entropy(const Tensor3& pred, const std::vector<double>& target) {
    if (pred.size() != target.size())
        throw DimensionError("cross_entropy: prediction size " + std::to_string(pred.size()) +
                             " vs target size " + std::to_string(target.size()));
    double loss = 0.0;
    const double* p = pred.data();
    for (size_t i = 0; i < target.size(); ++i)
        loss -= target[i] * std::log(p[i] + kCrossEntropyEps);
    return loss;
}

void cross_entropy_grad(const Tensor3& pred, const std::vector<double>& target,
                        Tensor3& grad) {
    if (pred.size() != target.size())
        throw DimensionError("cross_entropy_grad: size mismatch");
    grad.resize(pred.channels(), pred.length());
    const double* p = pred.data();
    double* g = grad.data();
    for (size_t i = 0; i < target.size(); ++i)
        g[i] = -target[i] / (p[i] + kCrossEntropyEps);
}

double mse(const Tensor3& a, const Tensor3& b) {
    if (a.shape() != b.shape())
        throw DimensionError("mse: shape " + a.shape().str() + " vs " + b.shape().str());
    double acc = 0.0;
    const double* pa = a.data();
    const double* pb = b.data();
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = pa[i] - pb[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.size());
}

void mse_grad(const Tensor3& a, const Tensor3& b, Tensor3& grad) {
    if (a.shape() != b.shape())
        throw DimensionError("mse_grad: shape " + a.shape().str() + " vs " + b.shape().str());
    grad.resize(a.channels(), a.length());
    const double scale = 2.0 / static_cast<double>(a.size());
    const double* pa = a.data();
    const double* pb = b.data();
    double* g = grad.data();
    for (size_t i = 0; i < a.size(); ++i)
        g[i] = scale * (pa[i] - pb[i]);
}

// --- optimizers -------------------------------------------------------------

AdamOptimizer::AdamOptimizer(const Sequential& net, double lr, double beta1, double beta2,
                             double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    if (lr <= 0.0)
        throw ConfigError("adam: lr must be positive");
    m_ = net.make_grads();
    v_ = net.make_grads();
}

void AdamOptimizer::step(Sequential& net, const std::vector<LayerGrads>& grads) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    auto update = [&](std::vector<double>& p, const std::vector<double>& g,
                      std::vector<double>& m, std::vector<double>& v) {
        for (size_t i = 0; i < p.size(); ++i) {
            m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
            v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    };
    for (size_t l = 0; l < grads.size(); ++l) {
        update(net.layer(l).weights(), grads[l].weights, m_[l].weights, v_[l].weights);
        update(net.layer(l).bias(), grads[l].bias, m_[l].bias, v_[l].bias);
    }
}

void SgdOptimizer::step(Sequential& net, const std::vector<LayerGrads>& grads) {
    for (size_t l = 0; l < grads.size(); ++l) {
        auto& w = net.layer(l).weights();
        auto& b = net.layer(l).bias();
        for (size_t i = 0; i < w.size(); ++i) w[i] -= lr_ * grads[l].weights[i];
        for (size_t i = 0; i < b.size(); ++i) b[i] -= lr_ * grads[l].bias[i];
    }
}

// --- gradient check -----------------------------------------------------------

GradCheckReport grad_check(const Sequential& net, const Tensor3& input,
                           const LossSpec& loss, double tolerance, double h) {
    const size_t n_layers = net.size();
    std::vector<Tensor3> base;
    net.forward_cache(input, base);

    auto base_access = [&](int i) -> const Tensor3& {
        return i < 0 ? input : base[static_cast<size_t>(i)];
    };

    // Analytic gradients.
    Tensor3 grad_final;
    std::map<size_t, Tensor3> injected;
    loss.grad(base_access, grad_final, injected);
    auto grads = net.make_grads();
    Tensor3 grad_input;
    net.backward(input, base, grad_final, injected, grads, &grad_input);

    GradCheckReport report;
    auto consider = [&](double ga, double gn, const std::string& where) {
        const double rel = std::abs(ga - gn) /
                           std::max({std::abs(ga), std::abs(gn), 1e-8});
        if (rel > report.max_rel_error) {
            report.max_rel_error = rel;
            report.worst_location = where;
        }
    };

    // Numeric gradients for parameters: perturb, rebuild downstream
    // outputs only, evaluate.
    std::vector<Tensor3> scratch(n_layers);
    Tensor3 perturbed_in;
    for (size_t l = 0; l < n_layers; ++l) {
        const Layer& layer = net.layer(l);
        const size_t np = layer.param_count();
        if (np == 0) continue;
        const Tensor3& lin = (l == 0) ? input : base[l - 1];
        auto mixed_access = [&](int i) -> const Tensor3& {
            if (i < 0) return input;
            return static_cast<size_t>(i) < l ? base[static_cast<size_t>(i)]
                                              : scratch[static_cast<size_t>(i)];
        };
        auto eval_at = [&](size_t idx, double delta) {
            layer.perturbed_forward(lin, base[l], idx, delta, scratch[l]);
            for (size_t j = l + 1; j < n_layers; ++j)
                net.layer(j).forward_to(scratch[j - 1], scratch[j]);
            return loss.value(mixed_access);
        };
        for (size_t idx = 0; idx < np; ++idx) {
            const double fp = eval_at(idx, h);
            const double fm = eval_at(idx, -h);
            const double gn = (fp - fm) / (2.0 * h);
            const double ga = idx < grads[l].weights.size()
                                  ? grads[l].weights[idx]
                                  : grads[l].bias[idx - grads[l].weights.size()];
            consider(ga, gn, std::string(layer.kind()) + "[" + std::to_string(l) +
                                 "] param " + std::to_string(idx));
        }
    }

    // Numeric gradients for input elements: plain forward from the bottom.
    auto scratch_access = [&](int i) -> const Tensor3& {
        return i < 0 ? perturbed_in : scratch[static_cast<size_t>(i)];
    };
    for (size_t e = 0; e < input.size(); ++e) {
        auto eval_at = [&](double delta) {
            perturbed_in = input;
            perturbed_in.data()[e] += delta;
            const Tensor3* cur = &perturbed_in;
            for (size_t j = 0; j < n_layers; ++j) {
                net.layer(j).forward_to(*cur, scratch[j]);
                cur = &scratch[j];
            }
            return loss.value(scratch_access);
        };
        const double fp = eval_at(h);
        const double fm = eval_at(-h);
        const double gn = (fp - fm) / (2.0 * h);
        consider(grad_input.data()[e], gn, "input element " + std::to_string(e));
    }

    report.pass = report.max_rel_error < tolerance;
    return report;
}

double min_nonzero_param_gradient(const Sequential& net, const Tensor3& input,
                                  const LossSpec& loss) {
    std::vector<Tensor3> cache;
    net.forward_cache(input, cache);
    auto access = [&](int i) -> const Tensor3& {
        return i < 0 ? input : cache[static_cast<size_t>(i)];
    };
    Tensor3 grad_final;
    std::map<size_t, Tensor3> injected;
    loss.grad(access, grad_final, injected);
    auto grads = net.make_grads();
    Tensor3 grad_input;
    net.backward(input, cache, grad_final, injected, grads, &grad_input);

    double best = std::numeric_limits<double>::infinity();
    auto consider = [&best](double v) {
        if (v != 0.0) best = std::min(best, std::abs(v));
    };
    for (const auto& g : grads) {
        for (double v : g.weights) consider(v);
        for (double v : g.bias) consider(v);
    }
    for (size_t i = 0; i < grad_input.size(); ++i)
        consider(grad_input.data()[i]);
    return best;
}

bool near_activation_boundary(const Sequential& net, const Tensor3& input, double margin) {
    std::vector<Tensor3> cache;
    net.forward_cache(input, cache);
    for (size_t l = 0; l < net.size(); ++l) {
        const Tensor3& in = (l == 0) ? input : cache[l - 1];
        const std::string kind = net.layer(l).kind();
        if (kind == "relu") {
            for (size_t i = 0; i < in.size(); ++i)
                if (std::abs(in.data()[i]) < margin) return true;
        } else if (kind == "maxpool") {
            const auto& pool = static_cast<const MaxPool1d&>(net.layer(l));
            const int w = pool.window();
            for (int c = 0; c < in.channels(); ++c) {
                const double* row = in.row(c);
                for (int t = 0; t + w <= in.length(); t += w) {
                    double top = row[t], second = -std::numeric_limits<double>::infinity();
                    for (int i = 1; i < w; ++i) {
                        if (row[t + i] > top) {
                            second = top;
                            top = row[t + i];
                        } else {
                            second = std::max(second, row[t + i]);
                        }
                    }
                    // A pair of exact zeros from upstream ReLU clamping is
                    // not a boundary: both slots are dead, so both partials
                    // agree (at 0) regardless of which index wins.
                    if (w > 1 && top - second < margin && !(top == 0.0 && second == 0.0))
                        return true;
                }
            }
        }
    }
    return false;
}

} // namespace olce
