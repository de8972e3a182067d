// Copyright 2026 The olce authors
// Differentiable 1-D conv / transposed-conv / pooling / dense layers with
// hand-written backward passes, losses, Adam/SGD, and a central-difference
// gradient checker. Double precision throughout.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "olce/rng.hpp"
#include "olce/tensor.hpp"

namespace olce {

struct LayerGrads {
    std::vector<double> weights;
    std::vector<double> bias;

    void zero() {
        std::fill(weights.begin(), weights.end(), 0.0);
        std::fill(bias.begin(), bias.end(), 0.0);
    }
};

class Layer {
public:
    virtual ~Layer() = default;

    virtual const char* kind() const = 0;
    virtual Shape3 out_shape(const Shape3& in) const = 0;
    virtual void forward_to(const Tensor3& x, Tensor3& out) const = 0;

    /// Gradients are accumulated (+=) into g when non-null; grad_x is
    /// overwritten.
    virtual void backward(const Tensor3& x, const Tensor3& grad_out,
                          Tensor3& grad_x, LayerGrads* g) const = 0;

    Tensor3 forward(const Tensor3& x) const {
        Tensor3 out;
        forward_to(x, out);
        return out;
    }

    std::vector<double>& weights() { return w_; }
    const std::vector<double>& weights() const { return w_; }
    std::vector<double>& bias() { return b_; }
    const std::vector<double>& bias() const { return b_; }
    size_t param_count() const { return w_.size() + b_.size(); }

    LayerGrads make_grads() const {
        return {std::vector<double>(w_.size(), 0.0), std::vector<double>(b_.size(), 0.0)};
    }

    /// Reads/writes the flat parameter vector (weights then bias).
    double get_param(size_t idx) const { return idx < w_.size() ? w_[idx] : b_[idx - w_.size()]; }
    void set_param(size_t idx, double v) {
        if (idx < w_.size()) w_[idx] = v; else b_[idx - w_.size()] = v;
    }

    /// Exact forward output when parameter idx is shifted by delta, built
    /// incrementally from the cached unperturbed output. Parametric layers
    /// are affine in their parameters, so this is O(output row) instead of
    /// a full layer pass.
    virtual void perturbed_forward(const Tensor3& x, const Tensor3& base_out,
                                   size_t idx, double delta, Tensor3& out) const;

    virtual void init_params(Rng&) {}
    virtual nlohmann::ordered_json config_json() const;

protected:
    std::vector<double> w_;
    std::vector<double> b_;
};

// --- layer zoo ------------------------------------------------------------

/// Valid (no padding), stride-1 cross-correlation. Weight layout
/// (out_channels, in_channels, kernel).
class Conv1d : public Layer {
public:
    Conv1d(int out_channels, int in_channels, int kernel);
    const char* kind() const override { return "conv"; }
    Shape3 out_shape(const Shape3& in) const override;
    void forward_to(const Tensor3& x, Tensor3& out) const override;
    void backward(const Tensor3& x, const Tensor3& grad_out,
                  Tensor3& grad_x, LayerGrads* g) const override;
    void perturbed_forward(const Tensor3& x, const Tensor3& base_out,
                           size_t idx, double delta, Tensor3& out) const override;
    void init_params(Rng& rng) override;
    nlohmann::ordered_json config_json() const override;

    int out_channels() const { return oc_; }
    int in_channels() const { return ic_; }
    int kernel() const { return k_; }

private:
    int oc_, ic_, k_;
};

/// Adjoint of Conv1d (stride 1, no padding): out length = in + kernel - 1.
/// Weight layout (out_channels, in_channels, kernel).
class TransposedConv1d : public Layer {
public:
    TransposedConv1d(int out_channels, int in_channels, int kernel);
    const char* kind() const override { return "transposed_conv"; }
    Shape3 out_shape(const Shape3& in) const override;
    void forward_to(const Tensor3& x, Tensor3& out) const override;
    void backward(const Tensor3& x, const Tensor3& grad_out,
                  Tensor3& grad_x, LayerGrads* g) const override;
    void perturbed_forward(const Tensor3& x, const Tensor3& base_out,
                           size_t idx, double delta, Tensor3& out) const override;
    void init_params(Rng& rng) override;
    nlohmann::ordered_json config_json() const override;

    int out_channels() const { return oc_; }
    int in_channels() const { return ic_; }
    int kernel() const { return k_; }

private:
    int oc_, ic_, k_;
};

/// Affine map on the flattened input. Weight layout (out_features, in_features).
class FullyConnected : public Layer {
public:
    FullyConnected(int out_features, int in_features);
    const char* kind() const override { return "fully_connected"; }
    Shape3 out_shape(const Shape3& in) const override;
    void forward_to(const Tensor3& x, Tensor3& out) const override;
    void backward(const Tensor3& x, const Tensor3& grad_out,
                  Tensor3& grad_x, LayerGrads* g) const override;
    void perturbed_forward(const Tensor3& x, const Tensor3& base_out,
                           size_t idx, double delta, Tensor3& out) const override;
    void init_params(Rng& rng) override;
    nlohmann::ordered_json config_json() const override;

    int out_features() const { return of_; }
    int in_features() const { return if_; }

private:
    int of_, if_;
};

class Relu : public Layer {
public:
    const char* kind() const override { return "relu"; }
    Shape3 out_shape(const Shape3& in) const override { return in; }
    void forward_to(const Tensor3& x, Tensor3& out) const override;
    void backward(const Tensor3& x, const Tensor3& grad_out,
                  Tensor3& grad_x, LayerGrads* g) const override;
};

/// Non-overlapping windows; a trailing partial window is dropped.
/// Backward routes to the first maximal index of each window.
class MaxPool1d : public Layer {
public:
    explicit MaxPool1d(int window = 2);
    const char* kind() const override { return "maxpool"; }
    Shape3 out_shape(const Shape3& in) const override;
    void forward_to(const Tensor3& x, Tensor3& out) const override;
    void backward(const Tensor3& x, const Tensor3& grad_out,
                  Tensor3& grad_x, LayerGrads* g) const override;
    nlohmann::ordered_json config_json() const override;
    int window() const { return window_; }

private:
    int window_;
};

/// Nearest-neighbor repetition along length; backward sums each group.
class Upsample1d : public Layer {
public:
    explicit Upsample1d(int factor = 2);
    const char* kind() const override { return "upsample"; }
    Shape3 out_shape(const Shape3& in) const override;
    void forward_to(const Tensor3& x, Tensor3& out) const override;
    void backward(const Tensor3& x, const Tensor3& grad_out,
                  Tensor3& grad_x, LayerGrads* g) const override;
    nlohmann::ordered_json config_json() const override;
    int factor() const { return factor_; }

private:
    int factor_;
};

/// Reinterprets the contiguous buffer with a new (channels, length).
class Reshape : public Layer {
public:
    Reshape(int channels, int length);
    const char* kind() const override { return "reshape"; }
    Shape3 out_shape(const Shape3& in) const override;
    void forward_to(const Tensor3& x, Tensor3& out) const override;
    void backward(const Tensor3& x, const Tensor3& grad_out,
                  Tensor3& grad_x, LayerGrads* g) const override;
    nlohmann::ordered_json config_json() const override;

private:
    int channels_, length_;
};

/// Max-subtracted softmax over all elements.
class Softmax : public Layer {
public:
    const char* kind() const override { return "softmax"; }
    Shape3 out_shape(const Shape3& in) const override { return in; }
    void forward_to(const Tensor3& x, Tensor3& out) const override;
    void backward(const Tensor3& x, const Tensor3& grad_out,
                  Tensor3& grad_x, LayerGrads* g) const override;
};

// --- model ------------------------------------------------------------------

class Sequential {
public:
    Sequential() = default;
    Sequential(Sequential&&) = default;
    Sequential& operator=(Sequential&&) = default;

    template <class L, class... Args>
    L& add(Args&&... args) {
        auto layer = std::make_unique<L>(std::forward<Args>(args)...);
        L& ref = *layer;
        layers_.push_back(std::move(layer));
        return ref;
    }

    size_t size() const { return layers_.size(); }
    Layer& layer(size_t i) { return *layers_[i]; }
    const Layer& layer(size_t i) const { return *layers_[i]; }

    void init_params(uint64_t seed);

    Tensor3 forward(const Tensor3& x) const;
    /// cache[i] = output of layer i; buffers are reused across calls.
    void forward_cache(const Tensor3& x, std::vector<Tensor3>& cache) const;

    /// Backward from grad_final at the last output, with optional extra
    /// gradients injected at intermediate layer outputs (layer index ->
    /// gradient). Parameter gradients accumulate into grads; grad_input
    /// may be null.
    void backward(const Tensor3& x, const std::vector<Tensor3>& cache,
                  const Tensor3& grad_final,
                  const std::map<size_t, Tensor3>& injected,
                  std::vector<LayerGrads>& grads, Tensor3* grad_input) const;

    std::vector<LayerGrads> make_grads() const;
    size_t total_params() const;

    nlohmann::ordered_json to_json() const;
    static Sequential from_json(const nlohmann::ordered_json& j);

private:
    std::vector<std::unique_ptr<Layer>> layers_;
};

/// Checkpoint file: versioned JSON, layers in network order.
void save_checkpoint(const std::filesystem::path& path, const Sequential& net);
Sequential load_checkpoint(const std::filesystem::path& path);

// --- losses -------------------------------------------------------------

inline constexpr double kCrossEntropyEps = 1e-12;

/// -sum target * log(pred + eps); pred holds probabilities.
double cross_entropy(const Tensor3& pred, const std::vector<double>& target);
/// d(cross_entropy)/d(pred), written into grad (same shape as pred).
void cross_entropy_grad(const Tensor3& pred, const std::vector<double>& target,
                        Tensor3& grad);

/// Mean squared difference over all elements.
double mse(const Tensor3& a, const Tensor3& b);
/// d(mse)/da, written into grad.
void mse_grad(const Tensor3& a, const Tensor3& b, Tensor3& grad);

// --- optimizers ----------------------------------------------------------

class AdamOptimizer {
public:
    explicit AdamOptimizer(const Sequential& net, double lr = 1e-3,
                           double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
    void step(Sequential& net, const std::vector<LayerGrads>& grads);

private:
    double lr_, beta1_, beta2_, eps_;
    long long t_ = 0;
    std::vector<LayerGrads> m_, v_;
};

class SgdOptimizer {
public:
    explicit SgdOptimizer(double lr) : lr_(lr) {}
    void step(Sequential& net, const std::vector<LayerGrads>& grads);

private:
    double lr_;
};

// --- gradient checking -----------------------------------------------------

struct GradCheckReport {
    double max_rel_error = 0.0;
    bool pass = false;
    std::string worst_location;
};

/// Reads any layer output (and the input as index -1) of the evaluation
/// under inspection.
using CacheAccess = std::function<const Tensor3&(int)>;

struct LossSpec {
    /// Scalar objective over the cached layer outputs.
    std::function<double(const CacheAccess&)> value;
    /// Analytic gradient: fills grad_final (w.r.t. the last output) and
    /// optional injections at intermediate layer outputs.
    std::function<void(const CacheAccess&, Tensor3& grad_final,
                       std::map<size_t, Tensor3>& injected)>
        grad;
};

/// Central differences (step h) over every parameter and input element;
/// relative error |ga - gn| / max(|ga|, |gn|, 1e-8).
GradCheckReport grad_check(const Sequential& net, const Tensor3& input,
                           const LossSpec& loss, double tolerance, double h = 1e-5);

/// True when a ReLU input or a pool-window runner-up gap sits within
/// margin of a non-differentiable boundary; callers resample the input
/// until the point is clean.
bool near_activation_boundary(const Sequential& net, const Tensor3& input, double margin);

/// Smallest nonzero |analytic parameter gradient| at this point. Central
/// differences carry ~1e-10 of rounding noise for O(1) losses at
/// h = 1e-5, so gradients below roughly noise/tolerance cannot be
/// resolved; callers resample until this clears a floor.
double min_nonzero_param_gradient(const Sequential& net, const Tensor3& input,
                                  const LossSpec& loss);

} // namespace olce
