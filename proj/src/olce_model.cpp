// Copyright 2026 The olce authors
//
// Licensed under the Apache License, Version 2.0

#include "olce/olce_model.hpp"

#include <cmath>
#include <fstream>

namespace olce {

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (lr <= 0.0) throw ConfigError("train: lr must be positive");
    if (lambda_recon < 0.0) throw ConfigError("train: lambda_recon must be >= 0");
}

Sequential build_encoder(const OlceArch& a) {
    Sequential net;
    net.add<Conv1d>(a.conv1_filters, a.channels, a.conv1_kernel);
    net.add<Relu>();
    net.add<MaxPool1d>(a.pool);
    net.add<Conv1d>(a.conv2_filters, a.conv1_filters, a.conv2_kernel);
    net.add<Relu>();
    net.add<MaxPool1d>(a.pool);
    net.add<FullyConnected>(a.classes, a.flat_features());
    net.add<Softmax>();
    return net;
}

Sequential build_olce_network(const OlceArch& a) {
    Sequential net = build_encoder(a);
    net.add<FullyConnected>(a.flat_features(), a.classes);
    net.add<Reshape>(a.conv2_filters, a.pooled2_length());
    net.add<Upsample1d>(a.pool);
    net.add<TransposedConv1d>(a.conv1_filters, a.conv2_filters, a.conv2_kernel);
    net.add<Relu>();
    net.add<Upsample1d>(a.pool);
    net.add<TransposedConv1d>(a.channels, a.conv1_filters, a.conv1_kernel);
    return net;
}

namespace {

constexpr size_t kBottleneckIdx = 7; // softmax layer in build_olce_network

LabelVector to_label_vector(const Tensor3& t) {
    LabelVector v;
    v.probs.assign(t.data(), t.data() + t.size());
    return v;
}

} // namespace

OlceModel::OlceModel(const OlceArch& arch, uint64_t init_seed)
    : arch_(arch), net_(build_olce_network(arch)), bottleneck_idx_(kBottleneckIdx) {
    net_.init_params(init_seed);
}

OlceModel::OlceModel(const OlceArch& arch, Sequential net)
    : arch_(arch), net_(std::move(net)), bottleneck_idx_(kBottleneckIdx) {
    if (net_.size() != build_olce_network(arch).size())
        throw DimensionError("network layer count does not match the architecture");
}

LabelVector OlceModel::encode(const Tensor3& x) const {
    require_shape(x, arch_.channels, arch_.length, "encode input");
    Tensor3 cur = x, next;
    for (size_t i = 0; i <= bottleneck_idx_; ++i) {
        net_.layer(i).forward_to(cur, next);
        std::swap(cur, next);
    }
    return to_label_vector(cur);
}

Tensor3 OlceModel::forward_decoder(const Tensor3& bottleneck) const {
    Tensor3 cur = bottleneck, next;
    for (size_t i = bottleneck_idx_ + 1; i < net_.size(); ++i) {
        net_.layer(i).forward_to(cur, next);
        std::swap(cur, next);
    }
    return cur;
}

Tensor3 OlceModel::decode(const LabelVector& y) const {
    if (static_cast<int>(y.probs.size()) != arch_.classes)
        throw DimensionError("decode: expected " + std::to_string(arch_.classes) +
                             " classes, found " + std::to_string(y.probs.size()));
    Tensor3 b(arch_.classes, 1);
    std::copy(y.probs.begin(), y.probs.end(), b.data());
    return forward_decoder(b);
}

int OlceModel::classify(const Tensor3& x) const {
    return encode(x).argmax();
}

TrainLog OlceModel::train(const Dataset& ds, const TrainConfig& cfg) {
    cfg.validate();
    if (!ds.split || ds.split->train.empty())
        throw ConfigError("train: dataset has no training split");
    if (ds.num_classes != arch_.classes)
        throw DimensionError("train: dataset has " + std::to_string(ds.num_classes) +
                             " classes, network expects " + std::to_string(arch_.classes));

    std::vector<int> order = ds.split->train;
    AdamOptimizer adam(net_, cfg.lr);
    auto grads = net_.make_grads();
    std::vector<Tensor3> cache;
    Tensor3 grad_final, ce_grad;
    std::map<size_t, Tensor3> injected;

    TrainLog log;
    std::vector<double> onehot(arch_.classes);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng shuffle_rng(Rng::derive(cfg.seed, 0x45504f4348ULL, static_cast<uint64_t>(epoch)));
        shuffle_rng.shuffle(order);

        double ce_sum = 0.0, mse_sum = 0.0;
        for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const size_t stop = std::min(order.size(), start + cfg.batch_size);
            const double inv_batch = 1.0 / static_cast<double>(stop - start);
            for (auto& g : grads) g.zero();

            for (size_t bi = start; bi < stop; ++bi) {
                const ResponseSample& s = ds.samples[order[bi]];
                net_.forward_cache(s.sensors, cache);
                const Tensor3& probs = cache[bottleneck_idx_];
                const Tensor3& recon = cache.back();

                std::fill(onehot.begin(), onehot.end(), 0.0);
                onehot[s.label] = 1.0;
                ce_sum += cross_entropy(probs, onehot);
                mse_sum += mse(recon, s.sensors);

                // d(mean batch loss)/d(recon)
                mse_grad(recon, s.sensors, grad_final);
                const double scale = cfg.lambda_recon * inv_batch;
                for (size_t e = 0; e < grad_final.size(); ++e)
                    grad_final.data()[e] *= scale;

                cross_entropy_grad(probs, onehot, ce_grad);
                for (size_t e = 0; e < ce_grad.size(); ++e)
                    ce_grad.data()[e] *= inv_batch;
                injected.clear();
                injected.emplace(bottleneck_idx_, ce_grad);

                net_.backward(s.sensors, cache, grad_final, injected, grads, nullptr);
            }
            adam.step(net_, grads);
        }
        const double n = static_cast<double>(order.size());
        log.ce.push_back(ce_sum / n);
        log.mse.push_back(mse_sum / n);
        if (!std::isfinite(log.ce.back()) || !std::isfinite(log.mse.back()))
            throw NumericError("training diverged at epoch " + std::to_string(epoch + 1) +
                               " (non-finite loss)");
    }
    return log;
}

void OlceModel::export_decoded(const Dataset& ds, const std::vector<int>& indices,
                               const std::filesystem::path& out_dir) const {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw IoError("cannot create output dir: " + out_dir.string() + " (" + ec.message() + ")");
    for (int idx : indices) {
        if (idx < 0 || idx >= static_cast<int>(ds.samples.size()))
            throw ConfigError("export_decoded: sample index " + std::to_string(idx) +
                              " out of range");
        const ResponseSample& s = ds.samples[idx];
        const std::string id = s.source_id.empty() ? "sample_" + std::to_string(idx)
                                                   : s.source_id;
        save_sample(out_dir / (id + ".orig.csv"), s);

        ResponseSample decoded = s;
        decoded.sensors = decode(encode(s.sensors));
        save_sample(out_dir / (id + ".decoded.csv"), decoded);
    }
}

void OlceModel::save(const std::filesystem::path& path) const {
    save_checkpoint(path, net_);
}

OlceModel OlceModel::load(const std::filesystem::path& path, const OlceArch& arch) {
    return OlceModel(arch, load_checkpoint(path));
}

GradCheckReport checked_olce_gradcheck(uint64_t seed, double tolerance, double h,
                                       double lambda_recon, double grad_floor,
                                       const OlceArch& arch) {
    constexpr int kMaxAttempts = 4000;
    std::vector<double> target(arch.classes, 0.0);
    target[arch.classes / 2] = 1.0;
    for (int attempt = 0;; ++attempt) {
        OlceModel model(arch, Rng::derive(seed, 0x4f4743ULL, static_cast<uint64_t>(attempt)));
        Rng rng(Rng::derive(seed, 0x4f474358ULL, static_cast<uint64_t>(attempt)));
        Tensor3 x(arch.channels, arch.length);
        for (size_t i = 0; i < x.size(); ++i)
            x.data()[i] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 1.5);

        const LossSpec loss = olce_loss_spec(model, x, target, lambda_recon);
        if (attempt < kMaxAttempts &&
            (near_activation_boundary(model.net(), x, 2.0 * h) ||
             min_nonzero_param_gradient(model.net(), x, loss) < grad_floor))
            continue;
        return grad_check(model.net(), x, loss, tolerance, h);
    }
}

LossSpec olce_loss_spec(const OlceModel& model, const Tensor3& input,
                        const std::vector<double>& target, double lambda_recon) {
    const size_t bidx = model.bottleneck_index();
    LossSpec spec;
    spec.value = [&input, target, lambda_recon, bidx, n = model.net().size()](
                     const CacheAccess& at) {
        return cross_entropy(at(static_cast<int>(bidx)), target) +
               lambda_recon * mse(at(static_cast<int>(n) - 1), input);
    };
    spec.grad = [&input, target, lambda_recon, bidx, n = model.net().size()](
                    const CacheAccess& at, Tensor3& grad_final,
                    std::map<size_t, Tensor3>& injected) {
        mse_grad(at(static_cast<int>(n) - 1), input, grad_final);
        for (size_t e = 0; e < grad_final.size(); ++e)
            grad_final.data()[e] *= lambda_recon;
        Tensor3 g;
        cross_entropy_grad(at(static_cast<int>(bidx)), target, g);
        injected.emplace(bidx, std::move(g));
    };
    return spec;
}

} // namespace olce
