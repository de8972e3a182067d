// Copyright 2026 The olce authors
// LDA and PCA+LDA baselines.
//
// Licensed under the Apache License, Version 2.0

#include <fstream>
#include <set>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "olce/baselines.hpp"

namespace olce {

FlatSample flatten(const ResponseSample& s) {
    FlatSample f;
    f.features.assign(s.sensors.data(), s.sensors.data() + s.sensors.size());
    f.label = s.label;
    return f;
}

namespace {

std::vector<int> train_indices(const Dataset& ds) {
    if (ds.split) return ds.split->train;
    std::vector<int> all(ds.samples.size());
    for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    return all;
}

Eigen::MatrixXd train_matrix(const Dataset& ds, const std::vector<int>& idx,
                             std::vector<int>& labels) {
    const int d = ds.channels() * ds.length();
    Eigen::MatrixXd x(idx.size(), d);
    labels.resize(idx.size());
    for (size_t r = 0; r < idx.size(); ++r) {
        const auto& s = ds.samples[idx[r]];
        x.row(r) = Eigen::Map<const Eigen::RowVectorXd>(s.sensors.data(), d);
        labels[r] = s.label;
    }
    return x;
}

Eigen::VectorXd to_vector(const ResponseSample& s) {
    return Eigen::Map<const Eigen::VectorXd>(s.sensors.data(),
                                             static_cast<Eigen::Index>(s.sensors.size()));
}

nlohmann::ordered_json matrix_json(const Eigen::MatrixXd& m) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

} // namespace

// --- LdaCore -----------------------------------------------------------------

void LdaCore::fit(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                  int num_classes) {
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();
    if (n == 0)
        throw DataError("LDA: empty training set");
    if (static_cast<Eigen::Index>(labels.size()) != n)
        throw DimensionError("LDA: label count does not match sample count");

    std::vector<Eigen::Index> counts(num_classes, 0);
    for (int lbl : labels) {
        if (lbl < 0 || lbl >= num_classes)
            throw DataError("LDA: label " + std::to_string(lbl) + " outside [0, " +
                            std::to_string(num_classes) + ")");
        ++counts[lbl];
    }
    int present = 0;
    for (Eigen::Index c : counts) present += c > 0;
    if (present < 2)
        throw DataError("LDA: training set contains a single class; need at least 2");

    Eigen::MatrixXd means = Eigen::MatrixXd::Zero(num_classes, d);
    for (Eigen::Index i = 0; i < n; ++i)
        means.row(labels[i]) += x.row(i);
    for (int c = 0; c < num_classes; ++c)
        if (counts[c] > 0) means.row(c) /= static_cast<double>(counts[c]);

    // Within-class scatter normalized by n (duplication-invariant).
    Eigen::MatrixXd centered(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        centered.row(i) = x.row(i) - means.row(labels[i]);
    Eigen::MatrixXd sw = (centered.transpose() * centered) / static_cast<double>(n);

    const double ridge = std::max(1e-6 * sw.trace() / static_cast<double>(d), 1e-12);
    sw.diagonal().array() += ridge;

    Eigen::LDLT<Eigen::MatrixXd> solver(sw);
    if (solver.info() != Eigen::Success)
        throw NumericError("LDA: scatter factorization failed");
    w_ = solver.solve(means.transpose()); // d x K

    b_.resize(num_classes);
    for (int c = 0; c < num_classes; ++c) {
        if (counts[c] == 0) {
            w_.col(c).setZero();
            b_(c) = -1e300; // never predicted
            continue;
        }
        const double prior = static_cast<double>(counts[c]) / static_cast<double>(n);
        b_(c) = -0.5 * means.row(c).dot(w_.col(c)) + std::log(prior);
    }
}

int LdaCore::predict(const Eigen::VectorXd& x) const {
    if (!fitted())
        throw ConfigError("LDA: predict before fit");
    if (x.size() != w_.rows())
        throw DimensionError("LDA: expected feature size " + std::to_string(w_.rows()) +
                             ", found " + std::to_string(x.size()));
    Eigen::VectorXd scores = w_.transpose() * x + b_;
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < scores.size(); ++c)
        if (scores(c) > scores(best)) best = c;
    return static_cast<int>(best);
}

nlohmann::ordered_json LdaCore::to_json() const {
    return {{"w", matrix_json(w_)},
            {"b", std::vector<double>(b_.data(), b_.data() + b_.size())}};
}

// --- LdaClassifier --------------------------------------------------------

void LdaClassifier::fit(const Dataset& ds) {
    const auto idx = train_indices(ds);
    std::vector<int> labels;
    const Eigen::MatrixXd x = train_matrix(ds, idx, labels);
    core_.fit(x, labels, ds.num_classes);
}

int LdaClassifier::predict(const ResponseSample& s) const {
    return core_.predict(to_vector(s));
}

void LdaClassifier::save(const std::filesystem::path& path) const {
    nlohmann::ordered_json j{{"format", "olce-model"}, {"model", "lda"}, {"version", 1}};
    j.update(core_.to_json());
    std::ofstream out(path);
    if (!out) throw IoError("cannot write model dump: " + path.string());
    out << j.dump() << '\n';
}

// --- PcaLdaClassifier -------------------------------------------------------

void PcaLdaClassifier::fit_projection(const Eigen::MatrixXd& x) {
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();
    const int m = cfg_.components;
    if (n <= m)
        throw DataError("PCA: need more than " + std::to_string(m) +
                        " training samples, found " + std::to_string(n));

    mean_ = x.colwise().mean();
    Eigen::MatrixXd centered = x.rowwise() - mean_;

    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double tol = std::max(n, d) * std::numeric_limits<double>::epsilon() *
                       (sv.size() > 0 ? sv(0) : 0.0);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol) ++rank;
    if (rank < m)
        throw DataError("PCA: requested " + std::to_string(m) +
                        " components but achievable rank is " + std::to_string(rank));

    components_ = svd.matrixV().leftCols(m);
    scale_ = sv.head(m) / std::sqrt(static_cast<double>(n - 1));
}

Eigen::VectorXd PcaLdaClassifier::transform(const Eigen::VectorXd& x) const {
    if (components_.size() == 0)
        throw ConfigError("PCA: transform before fit");
    Eigen::VectorXd z = components_.transpose() * (x - mean_.transpose());
    return z.cwiseQuotient(scale_);
}

Eigen::VectorXd PcaLdaClassifier::inverse_transform(const Eigen::VectorXd& z) const {
    return components_ * z.cwiseProduct(scale_) + mean_.transpose();
}

void PcaLdaClassifier::fit(const Dataset& ds) {
    const auto idx = train_indices(ds);
    std::vector<int> labels;
    const Eigen::MatrixXd x = train_matrix(ds, idx, labels);
    fit_projection(x);

    Eigen::MatrixXd z(x.rows(), cfg_.components);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        z.row(i) = transform(x.row(i).transpose()).transpose();
    lda_.fit(z, labels, ds.num_classes);
}

int PcaLdaClassifier::predict(const ResponseSample& s) const {
    return lda_.predict(transform(to_vector(s)));
}

void PcaLdaClassifier::save(const std::filesystem::path& path) const {
    nlohmann::ordered_json j{{"format", "olce-model"},
                             {"model", "pca_lda"},
                             {"version", 1},
                             {"components", matrix_json(components_)},
                             {"mean", std::vector<double>(mean_.data(), mean_.data() + mean_.size())},
                             {"scale", std::vector<double>(scale_.data(), scale_.data() + scale_.size())},
                             {"lda", lda_.to_json()}};
    std::ofstream out(path);
    if (!out) throw IoError("cannot write model dump: " + path.string());
    out << j.dump() << '\n';
}

} // namespace olce
