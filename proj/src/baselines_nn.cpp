// Copyright 2026 The olce authors
// MLP and CNN+SVM baselines, plus the classifier factory.
//
// Licensed under the Apache License, Version 2.0

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>

#include "olce/baselines.hpp"

namespace olce {

namespace {

std::vector<int> train_indices(const Dataset& ds) {
    if (ds.split) return ds.split->train;
    std::vector<int> all(ds.samples.size());
    for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    return all;
}

/// Mini-batch Adam on softmax + cross-entropy. The softmax layer must be
/// the last one in the network.
void train_softmax_ce(Sequential& net, const std::vector<Tensor3>& inputs,
                      const std::vector<int>& labels, int num_classes, int epochs,
                      int batch_size, double lr, uint64_t seed) {
    AdamOptimizer adam(net, lr);
    auto grads = net.make_grads();
    std::vector<Tensor3> cache;
    Tensor3 grad_final;
    std::vector<double> onehot(num_classes);
    std::map<size_t, Tensor3> no_injection;

    std::vector<int> order(inputs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

    for (int epoch = 0; epoch < epochs; ++epoch) {
        Rng rng(Rng::derive(seed, 0x4345504f43ULL, static_cast<uint64_t>(epoch)));
        rng.shuffle(order);
        double ce_sum = 0.0;
        for (size_t start = 0; start < order.size(); start += batch_size) {
            const size_t stop = std::min(order.size(), start + batch_size);
            const double inv_batch = 1.0 / static_cast<double>(stop - start);
            for (auto& g : grads) g.zero();
            for (size_t bi = start; bi < stop; ++bi) {
                const Tensor3& x = inputs[order[bi]];
                net.forward_cache(x, cache);
                std::fill(onehot.begin(), onehot.end(), 0.0);
                onehot[labels[order[bi]]] = 1.0;
                ce_sum += cross_entropy(cache.back(), onehot);
                cross_entropy_grad(cache.back(), onehot, grad_final);
                for (size_t e = 0; e < grad_final.size(); ++e)
                    grad_final.data()[e] *= inv_batch;
                net.backward(x, cache, grad_final, no_injection, grads, nullptr);
            }
            adam.step(net, grads);
        }
        if (!std::isfinite(ce_sum))
            throw NumericError("training diverged at epoch " + std::to_string(epoch + 1));
    }
}

} // namespace

// --- MLP -----------------------------------------------------------------

Sequential MlpClassifier::build_network(int in_features, int num_classes,
                                        const std::vector<int>& hidden) {
    Sequential net;
    int prev = in_features;
    for (int width : hidden) {
        net.add<FullyConnected>(width, prev);
        net.add<Relu>();
        prev = width;
    }
    net.add<FullyConnected>(num_classes, prev);
    net.add<Softmax>();
    return net;
}

void MlpClassifier::fit(const Dataset& ds) {
    const auto idx = train_indices(ds);
    if (idx.empty())
        throw DataError("mlp: empty training set");
    in_features_ = ds.channels() * ds.length();
    net_ = build_network(in_features_, ds.num_classes, cfg_.hidden);
    net_.init_params(Rng::derive(cfg_.seed, 0x4d4c50ULL));

    std::vector<Tensor3> inputs;
    std::vector<int> labels;
    inputs.reserve(idx.size());
    for (int i : idx) {
        Tensor3 flat(in_features_, 1);
        std::copy(ds.samples[i].sensors.data(),
                  ds.samples[i].sensors.data() + ds.samples[i].sensors.size(), flat.data());
        inputs.push_back(std::move(flat));
        labels.push_back(ds.samples[i].label);
    }
    train_softmax_ce(net_, inputs, labels, ds.num_classes, cfg_.epochs, cfg_.batch_size,
                     cfg_.lr, cfg_.seed);
}

int MlpClassifier::predict(const ResponseSample& s) const {
    if (net_.size() == 0)
        throw ConfigError("mlp: predict before fit");
    if (static_cast<int>(s.sensors.size()) != in_features_)
        throw DimensionError("mlp: expected " + std::to_string(in_features_) +
                             " features, found " + std::to_string(s.sensors.size()));
    Tensor3 flat(in_features_, 1);
    std::copy(s.sensors.data(), s.sensors.data() + s.sensors.size(), flat.data());
    const Tensor3 probs = net_.forward(flat);
    return static_cast<int>(std::max_element(probs.data(), probs.data() + probs.size()) -
                            probs.data());
}

void MlpClassifier::save(const std::filesystem::path& path) const {
    save_checkpoint(path, net_);
}

GradCheckReport checked_mlp_gradcheck(uint64_t seed, double tolerance, double h,
                                      double grad_floor, int in_features, int num_classes,
                                      const std::vector<int>& hidden) {
    constexpr int kMaxAttempts = 4000;
    std::vector<double> target(num_classes, 0.0);
    target[num_classes / 2] = 1.0;
    for (int attempt = 0;; ++attempt) {
        Sequential net = MlpClassifier::build_network(in_features, num_classes, hidden);
        net.init_params(Rng::derive(seed, 0x4d4743ULL, static_cast<uint64_t>(attempt)));
        Rng rng(Rng::derive(seed, 0x4d474358ULL, static_cast<uint64_t>(attempt)));
        Tensor3 x(in_features, 1);
        for (size_t i = 0; i < x.size(); ++i)
            x.data()[i] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 1.5);

        LossSpec loss;
        const int last = static_cast<int>(net.size()) - 1;
        loss.value = [target, last](const CacheAccess& at) {
            return cross_entropy(at(last), target);
        };
        loss.grad = [target, last](const CacheAccess& at, Tensor3& gf,
                                   std::map<size_t, Tensor3>&) {
            cross_entropy_grad(at(last), target, gf);
        };
        if (attempt < kMaxAttempts &&
            (near_activation_boundary(net, x, 2.0 * h) ||
             min_nonzero_param_gradient(net, x, loss) < grad_floor))
            continue;
        return grad_check(net, x, loss, tolerance, h);
    }
}

// --- CNN + SVM --------------------------------------------------------------

std::vector<double> CnnSvmClassifier::features(const Tensor3& x) const {
    if (!has_encoder_)
        throw ConfigError("cnn_svm: features before fit");
    // Forward through conv/pool stages only (up to the second pool).
    Tensor3 cur = x, next;
    for (size_t i = 0; i < 6; ++i) {
        encoder_.layer(i).forward_to(cur, next);
        std::swap(cur, next);
    }
    return std::vector<double>(cur.data(), cur.data() + cur.size());
}

std::vector<double> CnnSvmClassifier::standardized(const std::vector<double>& f) const {
    if (f.size() != feat_mean_.size())
        throw DimensionError("cnn_svm: expected " + std::to_string(feat_mean_.size()) +
                             " features, found " + std::to_string(f.size()));
    std::vector<double> z(f.size());
    for (size_t i = 0; i < f.size(); ++i)
        z[i] = (f[i] - feat_mean_[i]) / feat_std_[i];
    return z;
}

void CnnSvmClassifier::fit_svm_only(const std::vector<std::vector<double>>& feats,
                                    const std::vector<int>& labels, int num_classes) {
    if (feats.empty())
        throw DataError("cnn_svm: empty training set");
    num_classes_ = num_classes;
    const size_t d = feats[0].size();
    const size_t n = feats.size();

    feat_mean_.assign(d, 0.0);
    feat_std_.assign(d, 0.0);
    for (const auto& f : feats)
        for (size_t i = 0; i < d; ++i) feat_mean_[i] += f[i];
    for (size_t i = 0; i < d; ++i) feat_mean_[i] /= static_cast<double>(n);
    for (const auto& f : feats)
        for (size_t i = 0; i < d; ++i) {
            const double c = f[i] - feat_mean_[i];
            feat_std_[i] += c * c;
        }
    for (size_t i = 0; i < d; ++i) {
        feat_std_[i] = std::sqrt(feat_std_[i] / static_cast<double>(n));
        if (feat_std_[i] < 1e-12) feat_std_[i] = 1.0;
    }

    std::vector<std::vector<double>> z(n);
    for (size_t i = 0; i < n; ++i) z[i] = standardized(feats[i]);

    svm_w_.assign(num_classes, std::vector<double>(d, 0.0));
    svm_b_.assign(num_classes, 0.0);
    final_hinge_.assign(num_classes, 0.0);

    std::vector<double> grad_w(d);
    for (int cls = 0; cls < num_classes; ++cls) {
        auto& w = svm_w_[cls];
        double& b = svm_b_[cls];
        for (int epoch = 0; epoch < cfg_.svm_epochs; ++epoch) {
            const double lr = cfg_.svm_lr / std::sqrt(1.0 + epoch);
            std::fill(grad_w.begin(), grad_w.end(), 0.0);
            double grad_b = 0.0, hinge = 0.0;
            for (size_t i = 0; i < n; ++i) {
                const double y = labels[i] == cls ? 1.0 : -1.0;
                double margin = b;
                for (size_t k = 0; k < d; ++k) margin += w[k] * z[i][k];
                margin *= y;
                if (margin < 1.0) {
                    hinge += 1.0 - margin;
                    for (size_t k = 0; k < d; ++k) grad_w[k] -= y * z[i][k];
                    grad_b -= y;
                }
            }
            const double inv_n = 1.0 / static_cast<double>(n);
            for (size_t k = 0; k < d; ++k) {
                grad_w[k] = grad_w[k] * inv_n + 2.0 * cfg_.svm_l2 * w[k];
                w[k] -= lr * grad_w[k];
            }
            b -= lr * grad_b * inv_n;
            final_hinge_[cls] = hinge * inv_n;
        }
    }
}

void CnnSvmClassifier::fit(const Dataset& ds) {
    const auto idx = train_indices(ds);
    if (idx.empty())
        throw DataError("cnn_svm: empty training set");

    arch_.channels = ds.channels();
    arch_.length = ds.length();
    arch_.classes = ds.num_classes;
    encoder_ = build_encoder(arch_);
    encoder_.init_params(Rng::derive(cfg_.seed, 0x434e4eULL));

    std::vector<Tensor3> inputs;
    std::vector<int> labels;
    inputs.reserve(idx.size());
    for (int i : idx) {
        inputs.push_back(ds.samples[i].sensors);
        labels.push_back(ds.samples[i].label);
    }
    train_softmax_ce(encoder_, inputs, labels, ds.num_classes, cfg_.cnn_epochs,
                     cfg_.cnn_batch_size, cfg_.cnn_lr, cfg_.seed);
    has_encoder_ = true;

    std::vector<std::vector<double>> feats;
    feats.reserve(inputs.size());
    for (const auto& x : inputs)
        feats.push_back(features(x));
    fit_svm_only(feats, labels, ds.num_classes);
}

int CnnSvmClassifier::predict_features(const std::vector<double>& f) const {
    if (svm_w_.empty())
        throw ConfigError("cnn_svm: predict before fit");
    const auto z = standardized(f);
    int best = 0;
    double best_margin = -std::numeric_limits<double>::infinity();
    for (int cls = 0; cls < num_classes_; ++cls) {
        double m = svm_b_[cls];
        for (size_t k = 0; k < z.size(); ++k) m += svm_w_[cls][k] * z[k];
        if (m > best_margin) {
            best_margin = m;
            best = cls;
        }
    }
    return best;
}

int CnnSvmClassifier::predict(const ResponseSample& s) const {
    return predict_features(features(s.sensors));
}

void CnnSvmClassifier::save(const std::filesystem::path& path) const {
    nlohmann::ordered_json svms = nlohmann::ordered_json::array();
    for (int cls = 0; cls < num_classes_; ++cls)
        svms.push_back({{"w", svm_w_[cls]}, {"b", svm_b_[cls]}});
    nlohmann::ordered_json j{{"format", "olce-model"},
                             {"model", "cnn_svm"},
                             {"version", 1},
                             {"encoder", has_encoder_ ? encoder_.to_json()
                                                      : nlohmann::ordered_json()},
                             {"feature_mean", feat_mean_},
                             {"feature_std", feat_std_},
                             {"svms", svms}};
    std::ofstream out(path);
    if (!out) throw IoError("cannot write model dump: " + path.string());
    out << j.dump() << '\n';
}

// --- OLCE adapter + factory ----------------------------------------------

namespace {

class OlceClassifierAdapter : public Classifier {
public:
    explicit OlceClassifierAdapter(TrainConfig cfg) : cfg_(cfg) {}

    const char* name() const override { return "olce"; }

    void fit(const Dataset& ds) override {
        OlceArch arch;
        arch.channels = ds.channels();
        arch.length = ds.length();
        arch.classes = ds.num_classes;
        model_.emplace(arch, Rng::derive(cfg_.seed, 0x4f4c4345ULL));
        model_->train(ds, cfg_);
    }

    int predict(const ResponseSample& s) const override {
        if (!model_)
            throw ConfigError("olce: predict before fit");
        return model_->classify(s.sensors);
    }

    void save(const std::filesystem::path& path) const override {
        if (!model_)
            throw ConfigError("olce: save before fit");
        model_->save(path);
    }

private:
    TrainConfig cfg_;
    std::optional<OlceModel> model_;
};

} // namespace

std::vector<std::string> known_model_names() {
    return {"olce", "lda", "mlp", "dt", "pca_lda", "cnn_svm"};
}

std::unique_ptr<Classifier> make_classifier(const std::string& name, uint64_t seed,
                                            const TrainConfig& olce_cfg,
                                            const MlpConfig& mlp_cfg,
                                            const CnnSvmConfig& cnn_cfg) {
    if (name == "olce") {
        TrainConfig cfg = olce_cfg;
        cfg.seed = seed;
        return std::make_unique<OlceClassifierAdapter>(cfg);
    }
    if (name == "lda") return std::make_unique<LdaClassifier>();
    if (name == "mlp") {
        MlpConfig cfg = mlp_cfg;
        cfg.seed = seed;
        return std::make_unique<MlpClassifier>(cfg);
    }
    if (name == "dt") return std::make_unique<DecisionTreeClassifier>();
    if (name == "pca_lda") return std::make_unique<PcaLdaClassifier>();
    if (name == "cnn_svm") {
        CnnSvmConfig cfg = cnn_cfg;
        cfg.seed = seed;
        return std::make_unique<CnnSvmClassifier>(cfg);
    }
    std::string valid;
    for (const auto& n : known_model_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw ConfigError("unknown model '" + name + "' (valid models: " + valid + ")");
}

} // namespace olce
