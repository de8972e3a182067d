// Copyright 2026 The olce authors
// Gini decision tree baseline.
//
// Licensed under the Apache License, Version 2.0

#include <algorithm>
#include <fstream>

#include "olce/baselines.hpp"

namespace olce {

double gini_impurity(const std::vector<long long>& counts) {
    long long n = 0;
    for (long long c : counts) n += c;
    if (n == 0) return 0.0;
    double acc = 0.0;
    for (long long c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(n);
        acc += p * (1.0 - p);
    }
    return acc;
}

namespace {

int majority_class(const std::vector<long long>& counts) {
    int best = 0;
    for (int c = 1; c < static_cast<int>(counts.size()); ++c)
        if (counts[c] > counts[best]) best = c; // lowest index wins ties
    return best;
}

} // namespace

int DecisionTreeClassifier::build(std::vector<int>& order, int begin, int end, int depth,
                                  const std::vector<FlatSample>& data) {
    Node node;
    node.class_counts.assign(num_classes_, 0);
    for (int i = begin; i < end; ++i)
        ++node.class_counts[data[order[i]].label];
    node.majority = majority_class(node.class_counts);

    const int n = end - begin;
    const double parent_gini = gini_impurity(node.class_counts);
    const bool pure = node.class_counts[node.majority] == n;

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_score = parent_gini - 1e-12; // require strict improvement

    if (depth < cfg_.max_depth && n >= 2 && !pure) {
        const int d = static_cast<int>(data[order[begin]].features.size());
        std::vector<std::pair<double, int>> vals(n);
        std::vector<long long> left(num_classes_), right(num_classes_);
        for (int f = 0; f < d; ++f) {
            for (int i = 0; i < n; ++i) {
                const int idx = order[begin + i];
                vals[i] = {data[idx].features[f], idx};
            }
            std::sort(vals.begin(), vals.end());

            // Boundaries between distinct consecutive values.
            std::vector<int> bounds;
            for (int i = 1; i < n; ++i)
                if (vals[i].first > vals[i - 1].first) bounds.push_back(i);
            if (bounds.empty()) continue;

            // Evenly subsample candidate thresholds.
            std::vector<int> chosen;
            if (static_cast<int>(bounds.size()) <= cfg_.max_thresholds_per_feature) {
                chosen = bounds;
            } else {
                chosen.reserve(cfg_.max_thresholds_per_feature);
                const int m = static_cast<int>(bounds.size());
                for (int j = 0; j < cfg_.max_thresholds_per_feature; ++j) {
                    const int pick = bounds[static_cast<size_t>(j) * m /
                                            cfg_.max_thresholds_per_feature];
                    if (chosen.empty() || chosen.back() != pick) chosen.push_back(pick);
                }
            }

            std::fill(left.begin(), left.end(), 0);
            right = node.class_counts;
            size_t next_bound = 0;
            for (int i = 0; i < n && next_bound < chosen.size(); ++i) {
                if (i == chosen[next_bound]) {
                    const double gl = gini_impurity(left);
                    const double gr = gini_impurity(right);
                    const double score =
                        (static_cast<double>(i) * gl + static_cast<double>(n - i) * gr) /
                        static_cast<double>(n);
                    if (score < best_score) {
                        best_score = score;
                        best_feature = f;
                        best_threshold = 0.5 * (vals[i - 1].first + vals[i].first);
                    }
                    ++next_bound;
                }
                const int lbl = data[vals[i].second].label;
                ++left[lbl];
                --right[lbl];
            }
        }
    }

    const int node_idx = static_cast<int>(nodes_.size());
    nodes_.push_back(node);

    if (best_feature < 0)
        return node_idx; // leaf

    auto mid = std::stable_partition(order.begin() + begin, order.begin() + end,
                                     [&](int idx) {
                                         return data[idx].features[best_feature] <
                                                best_threshold;
                                     });
    const int split_at = static_cast<int>(mid - order.begin());
    // A chosen boundary always separates at least one sample per side.
    nodes_[node_idx].feature = best_feature;
    nodes_[node_idx].threshold = best_threshold;
    nodes_[node_idx].left = build(order, begin, split_at, depth + 1, data);
    nodes_[node_idx].right = build(order, split_at, end, depth + 1, data);
    return node_idx;
}

void DecisionTreeClassifier::fit(const Dataset& ds) {
    num_classes_ = ds.num_classes;
    nodes_.clear();

    std::vector<int> idx;
    if (ds.split) idx = ds.split->train;
    else {
        idx.resize(ds.samples.size());
        for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    }
    if (idx.empty())
        throw DataError("decision tree: empty training set");

    std::vector<FlatSample> data(ds.samples.size());
    for (int i : idx)
        data[i] = flatten(ds.samples[i]);

    std::vector<int> order = idx;
    build(order, 0, static_cast<int>(order.size()), 0, data);
}

int DecisionTreeClassifier::predict_flat(const std::vector<double>& features) const {
    if (nodes_.empty())
        throw ConfigError("decision tree: predict before fit");
    int cur = 0;
    while (!nodes_[cur].is_leaf()) {
        const Node& nd = nodes_[cur];
        if (nd.feature >= static_cast<int>(features.size()))
            throw DimensionError("decision tree: sample has " +
                                 std::to_string(features.size()) +
                                 " features, split needs index " +
                                 std::to_string(nd.feature));
        cur = features[nd.feature] < nd.threshold ? nd.left : nd.right;
    }
    return nodes_[cur].majority;
}

int DecisionTreeClassifier::predict(const ResponseSample& s) const {
    return predict_flat(flatten(s).features);
}

int DecisionTreeClassifier::depth() const {
    if (nodes_.empty()) return 0;
    // Depth via DFS from the root at index 0.
    struct Item { int node, depth; };
    std::vector<Item> stack{{0, 0}};
    int best = 0;
    while (!stack.empty()) {
        auto [nd, dep] = stack.back();
        stack.pop_back();
        best = std::max(best, dep);
        if (!nodes_[nd].is_leaf()) {
            stack.push_back({nodes_[nd].left, dep + 1});
            stack.push_back({nodes_[nd].right, dep + 1});
        }
    }
    return best;
}

void DecisionTreeClassifier::save(const std::filesystem::path& path) const {
    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    for (const auto& nd : nodes_)
        nodes.push_back({{"feature", nd.feature},
                         {"threshold", nd.threshold},
                         {"left", nd.left},
                         {"right", nd.right},
                         {"majority", nd.majority},
                         {"class_counts", nd.class_counts}});
    nlohmann::ordered_json j{{"format", "olce-model"},
                             {"model", "dt"},
                             {"version", 1},
                             {"num_classes", num_classes_},
                             {"nodes", nodes}};
    std::ofstream out(path);
    if (!out) throw IoError("cannot write model dump: " + path.string());
    out << j.dump() << '\n';
}

} // namespace olce
