#pragma once

#include <string>
#include <vector>

#include "gbfs/cost_model.hpp"
#include "gbfs/dataset.hpp"
#include "gbfs/tree.hpp"

namespace gbfs {

struct GbfsConfig {
    double mu = 0.0;             // feature extraction trade-off
    int iterations = 100;        // T
    double learning_rate = 0.1;  // constant step size alpha
    int depth = 4;
    int min_leaf = 1;
    unsigned long long seed = 13;
    bool normalize_trees = false;  // post-fit unit-norm scaling, off by default

    void validate() const;
};

struct IterationRecord {
    int iteration;                    // 1-based
    double train_logloss;             // sum over samples after this tree's step
    std::vector<int> newly_selected;  // features first extracted by this tree
    double penalized_impurity;        // fitted tree's squared loss / 2 + charge
};

// Additive model H(x) = alpha * sum_t h_t(x).
struct Ensemble {
    std::vector<RegressionTree> trees;
    double learning_rate = 0.1;
    int num_features = 0;
    std::vector<std::string> feature_names;
    std::vector<int> selected;  // first-use order
    std::vector<IterationRecord> history;

    double predict_margin(const std::vector<double>& x) const;
    int classify(const std::vector<double>& x) const;

    // Throws naming the first violated invariant.
    void validate() const;
};

// g_i = y_i / (1 + exp(y_i * H_i)); saturates to exactly 0 or y_i once
// |y_i * H_i| > 35.
std::vector<double> negative_gradient(const std::vector<int>& labels,
                                      const std::vector<double>& margins);

// Sum over samples of log(1 + exp(-y_i * H_i)), overflow-safe.
double log_loss(const std::vector<int>& labels, const std::vector<double>& margins);

// The training loop: repeatedly fit a cost-penalized tree to the negative
// gradient, step the margins by the learning rate, and mark the tree's
// features as selected. Constant trees are kept (they shift the bias) but a
// run stops early after 25 consecutive constant trees.
Ensemble train(const Dataset& ds, const GbfsConfig& config, const FeatureState& state);

// Continues a partial run up to config.iterations total trees. Margins and
// the selected-feature state are replayed from the existing trees, so the
// result is bit-identical to a single longer run.
Ensemble resume(Ensemble model, const Dataset& ds, const GbfsConfig& config,
                const FeatureState& initial_state);

// Selected features in first-use order.
std::vector<int> selected_features(const Ensemble& model);

}  // namespace gbfs
