// Copyright 2026 The olce authors
// The five comparison classifiers behind one fit/predict contract:
// LDA, MLP, decision tree (Gini), PCA+LDA, and CNN feature extractor
// with one-vs-rest linear SVMs.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "olce/neuralcore.hpp"
#include "olce/olce_model.hpp"
#include "olce/signalio.hpp"

namespace olce {

/// Flattened (channel-major) feature vector of one sample.
struct FlatSample {
    std::vector<double> features;
    int label = 0;
};

FlatSample flatten(const ResponseSample& s);

/// Common contract: fit touches only the training split; predict returns
/// a class index in [0, K).
class Classifier {
public:
    virtual ~Classifier() = default;
    virtual const char* name() const = 0;
    virtual void fit(const Dataset& ds) = 0;
    virtual int predict(const ResponseSample& s) const = 0;
    /// Versioned JSON model dump.
    virtual void save(const std::filesystem::path& path) const = 0;
};

// --- LDA ----------------------------------------------------------------

/// Class-conditional Gaussian discriminant with shared within-class
/// scatter (normalized by n, so duplicating the training set leaves the
/// decision function unchanged) and a trace-scaled ridge since the
/// scatter is singular when features outnumber samples.
class LdaCore {
public:
    void fit(const Eigen::MatrixXd& x, const std::vector<int>& labels, int num_classes);
    int predict(const Eigen::VectorXd& x) const;
    bool fitted() const { return w_.size() > 0; }
    nlohmann::ordered_json to_json() const;

private:
    Eigen::MatrixXd w_;   // d x K discriminant directions
    Eigen::VectorXd b_;   // K offsets (includes log priors)
};

class LdaClassifier : public Classifier {
public:
    const char* name() const override { return "lda"; }
    void fit(const Dataset& ds) override;
    int predict(const ResponseSample& s) const override;
    void save(const std::filesystem::path& path) const override;
    const LdaCore& core() const { return core_; }

private:
    LdaCore core_;
};

// --- MLP -----------------------------------------------------------------

struct MlpConfig {
    std::vector<int> hidden = {256, 128, 64, 32};
    int epochs = 100;
    int batch_size = 16;
    double lr = 1e-3;
    uint64_t seed = 0;
};

/// Four ReLU hidden layers on the flattened input, softmax + CE, Adam.
class MlpClassifier : public Classifier {
public:
    explicit MlpClassifier(MlpConfig cfg = {}) : cfg_(std::move(cfg)) {}
    const char* name() const override { return "mlp"; }
    void fit(const Dataset& ds) override;
    int predict(const ResponseSample& s) const override;
    void save(const std::filesystem::path& path) const override;
    const Sequential& net() const { return net_; }

    /// The hidden/output stack for a given input width; exposed for
    /// gradient checking.
    static Sequential build_network(int in_features, int num_classes,
                                    const std::vector<int>& hidden);

private:
    MlpConfig cfg_;
    Sequential net_;
    int in_features_ = 0;
};

/// Cross-entropy gradient check of the full hidden stack at a screened
/// random point (see checked_olce_gradcheck for the conditioning rules).
GradCheckReport checked_mlp_gradcheck(uint64_t seed, double tolerance, double h = 1e-5,
                                      double grad_floor = 1.5e-6,
                                      int in_features = kDefaultChannels * kDefaultLength,
                                      int num_classes = 7,
                                      const std::vector<int>& hidden = {256, 128, 64, 32});

// --- Decision tree -----------------------------------------------------------

/// Gini impurity of a class-count histogram: sum p(1-p).
double gini_impurity(const std::vector<long long>& counts);

struct DtConfig {
    int max_depth = 10;
    int max_thresholds_per_feature = 64;
};

class DecisionTreeClassifier : public Classifier {
public:
    struct Node {
        int feature = -1;       // -1 for leaves
        double threshold = 0.0; // go left when value < threshold
        int left = -1, right = -1;
        int majority = 0;
        std::vector<long long> class_counts;
        bool is_leaf() const { return feature < 0; }
    };

    explicit DecisionTreeClassifier(DtConfig cfg = {}) : cfg_(cfg) {}
    const char* name() const override { return "dt"; }
    void fit(const Dataset& ds) override;
    int predict(const ResponseSample& s) const override;
    void save(const std::filesystem::path& path) const override;

    int predict_flat(const std::vector<double>& features) const;
    const std::vector<Node>& nodes() const { return nodes_; }
    /// Longest root-to-leaf edge count.
    int depth() const;

private:
    DtConfig cfg_;
    std::vector<Node> nodes_;
    int num_classes_ = 0;

    int build(std::vector<int>& order, int begin, int end, int depth,
              const std::vector<FlatSample>& data);
};

// --- PCA + LDA ----------------------------------------------------------

struct PcaLdaConfig {
    int components = 49;
};

/// Centers by the training mean, keeps the top right-singular directions
/// with per-component whitening, then discriminates in the reduced space.
class PcaLdaClassifier : public Classifier {
public:
    explicit PcaLdaClassifier(PcaLdaConfig cfg = {}) : cfg_(cfg) {}
    const char* name() const override { return "pca_lda"; }
    void fit(const Dataset& ds) override;
    int predict(const ResponseSample& s) const override;
    void save(const std::filesystem::path& path) const override;

    Eigen::VectorXd transform(const Eigen::VectorXd& x) const;
    Eigen::VectorXd inverse_transform(const Eigen::VectorXd& z) const;
    const Eigen::MatrixXd& components() const { return components_; }

    /// Fits only the projection (no class labels needed); used by the
    /// reconstruction tests.
    void fit_projection(const Eigen::MatrixXd& x);

private:
    PcaLdaConfig cfg_;
    Eigen::RowVectorXd mean_;
    Eigen::MatrixXd components_; // d x m, orthonormal columns
    Eigen::VectorXd scale_;      // per-component std (whitening)
    LdaCore lda_;
};

// --- CNN + SVM ------------------------------------------------------------

struct CnnSvmConfig {
    int cnn_epochs = 100;
    int cnn_batch_size = 16;
    double cnn_lr = 1e-3;
    int svm_epochs = 200;
    double svm_l2 = 1e-3;
    double svm_lr = 0.05;
    uint64_t seed = 0;
};

/// Trains the two-conv encoder as a CE classifier, freezes it, extracts
/// the pooled pre-dense features, and fits K one-vs-rest linear SVMs by
/// hinge-loss subgradient descent on standardized features.
class CnnSvmClassifier : public Classifier {
public:
    explicit CnnSvmClassifier(CnnSvmConfig cfg = {}, OlceArch arch = {})
        : cfg_(cfg), arch_(arch) {}
    const char* name() const override { return "cnn_svm"; }
    void fit(const Dataset& ds) override;
    int predict(const ResponseSample& s) const override;
    void save(const std::filesystem::path& path) const override;

    std::vector<double> features(const Tensor3& x) const;
    int feature_size() const { return arch_.flat_features(); }

    /// Mean hinge term of one trained one-vs-rest machine on its
    /// training data; exposed for the separable-toy test.
    double train_hinge(int cls) const { return final_hinge_.at(cls); }

    /// Fits only the SVM heads on given feature vectors (skips the CNN);
    /// used by unit tests.
    void fit_svm_only(const std::vector<std::vector<double>>& feats,
                      const std::vector<int>& labels, int num_classes);
    /// argmax one-vs-rest margin over raw (unstandardized) features.
    int predict_features(const std::vector<double>& f) const;

private:
    CnnSvmConfig cfg_;
    OlceArch arch_;
    Sequential encoder_;
    bool has_encoder_ = false;
    std::vector<double> feat_mean_, feat_std_;
    std::vector<std::vector<double>> svm_w_; // per class
    std::vector<double> svm_b_;
    std::vector<double> final_hinge_;
    int num_classes_ = 0;

    std::vector<double> standardized(const std::vector<double>& f) const;
};

// --- factory ------------------------------------------------------------

struct BaselineSeeds {
    uint64_t seed = 0;
};

std::vector<std::string> known_model_names();

/// Builds any of {olce, lda, mlp, dt, pca_lda, cnn_svm}. The OLCE entry
/// wraps OlceModel behind the same contract.
std::unique_ptr<Classifier> make_classifier(const std::string& name, uint64_t seed,
                                            const TrainConfig& olce_cfg,
                                            const MlpConfig& mlp_cfg,
                                            const CnnSvmConfig& cnn_cfg);

} // namespace olce
