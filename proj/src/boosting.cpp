#include "gbfs/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace gbfs {

namespace {

constexpr int kMaxConsecutiveConstant = 25;

double logloss_term(int label, double margin) {
    const double m = label * margin;
    if (m < -35.0) return -m;
    return std::log1p(std::exp(-m));
}

}  // namespace

void GbfsConfig::validate() const {
    if (mu < 0.0) throw std::invalid_argument("mu must be non-negative");
    if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0))
        throw std::invalid_argument("learning_rate must be in (0,1]");
    if (depth < 1) throw std::invalid_argument("depth must be >= 1");
    if (min_leaf < 1) throw std::invalid_argument("min_leaf must be >= 1");
}

double Ensemble::predict_margin(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != num_features)
        throw std::invalid_argument("input has " + std::to_string(x.size()) +
                                    " features, model expects " + std::to_string(num_features));
    double sum = 0.0;
    for (const RegressionTree& t : trees) sum += t.predict(x);
    return learning_rate * sum;
}

int Ensemble::classify(const std::vector<double>& x) const {
    return predict_margin(x) < 0.0 ? -1 : +1;
}

void Ensemble::validate() const {
    if (!(learning_rate > 0.0 && learning_rate <= 1.0))
        throw std::runtime_error("model invariant: learning_rate in (0,1]");
    if (num_features < 1) throw std::runtime_error("model invariant: num_features >= 1");
    if (!feature_names.empty() && static_cast<int>(feature_names.size()) != num_features)
        throw std::runtime_error("model invariant: feature_names length equals num_features");
    if (history.size() != trees.size())
        throw std::runtime_error("model invariant: history length equals tree count");

    std::vector<int> first_use;
    std::set<int> seen;
    for (const RegressionTree& t : trees) {
        for (const TreeNode& nd : t.nodes()) {
            if (nd.is_leaf()) {
                if (!std::isfinite(nd.value))
                    throw std::runtime_error("model invariant: leaf values finite");
            } else {
                if (nd.feature < 0 || nd.feature >= num_features)
                    throw std::runtime_error("model invariant: split features within [0,d)");
                if (!std::isfinite(nd.threshold))
                    throw std::runtime_error("model invariant: thresholds finite");
            }
        }
        for (int f : t.features())
            if (seen.insert(f).second) first_use.push_back(f);
    }
    if (first_use != selected)
        throw std::runtime_error(
            "model invariant: selected equals union of tree features in first-use order");
}

std::vector<double> negative_gradient(const std::vector<int>& labels,
                                      const std::vector<double>& margins) {
    if (labels.size() != margins.size())
        throw std::invalid_argument("labels and margins must have equal length");
    std::vector<double> g(labels.size());
    for (size_t i = 0; i < labels.size(); ++i) {
        if (std::isnan(margins[i]))
            throw std::invalid_argument("NaN margin at index " + std::to_string(i));
        const double y = labels[i];
        const double m = y * margins[i];
        if (m > 35.0)
            g[i] = 0.0;
        else if (m < -35.0)
            g[i] = y;
        else
            g[i] = y / (1.0 + std::exp(m));
    }
    return g;
}

double log_loss(const std::vector<int>& labels, const std::vector<double>& margins) {
    if (labels.size() != margins.size())
        throw std::invalid_argument("labels and margins must have equal length");
    double total = 0.0;
    for (size_t i = 0; i < labels.size(); ++i) total += logloss_term(labels[i], margins[i]);
    return total;
}

Ensemble train(const Dataset& ds, const GbfsConfig& config, const FeatureState& state) {
    Ensemble empty;
    empty.learning_rate = config.learning_rate;
    empty.num_features = ds.d();
    empty.feature_names = ds.feature_names;
    return resume(std::move(empty), ds, config, state);
}

Ensemble resume(Ensemble model, const Dataset& ds, const GbfsConfig& config,
                const FeatureState& initial_state) {
    config.validate();
    ds.validate();
    if (initial_state.num_features() != ds.d())
        throw std::invalid_argument("feature state dimensioned for " +
                                    std::to_string(initial_state.num_features()) +
                                    " features, dataset has " + std::to_string(ds.d()));
    if (model.num_features != ds.d())
        throw std::invalid_argument("model dimensioned for " + std::to_string(model.num_features) +
                                    " features, dataset has " + std::to_string(ds.d()));
    if (model.learning_rate != config.learning_rate)
        throw std::invalid_argument("config learning_rate differs from the model's");

    const int n = ds.n();

    // Replay existing trees so a resumed run continues bit-identically.
    std::vector<double> margins(n, 0.0);
    FeatureState state = initial_state;
    int consecutive_constant = 0;
    for (const RegressionTree& t : model.trees) {
        for (int i = 0; i < n; ++i) margins[i] += config.learning_rate * t.predict_row(ds, i);
        state = state.mark_used(t.features());
        consecutive_constant = t.is_constant() ? consecutive_constant + 1 : 0;
    }

    double prev_loss = model.history.empty() ? log_loss(ds.labels, margins)
                                             : model.history.back().train_logloss;

    for (int t = static_cast<int>(model.trees.size()) + 1; t <= config.iterations; ++t) {
        if (consecutive_constant >= kMaxConsecutiveConstant) {
            std::fprintf(stderr,
                         "gbfs: stopping after %d consecutive constant trees (%d of %d done)\n",
                         consecutive_constant, t - 1, config.iterations);
            break;
        }

        const std::vector<double> g = negative_gradient(ds.labels, margins);
        RegressionTree tree = fit_tree(g, ds, state, config.mu, config.depth, config.min_leaf);

        if (config.normalize_trees) {
            double sq = 0.0;
            for (int i = 0; i < n; ++i) {
                const double p = tree.predict_row(ds, i);
                sq += p * p;
            }
            if (sq > 0.0) tree.scale_leaves(1.0 / std::sqrt(sq));
        }

        double fit_sse = 0.0;
        for (int i = 0; i < n; ++i) {
            const double p = tree.predict_row(ds, i);
            fit_sse += (g[i] - p) * (g[i] - p);
            margins[i] += config.learning_rate * p;
            if (!std::isfinite(margins[i]))
                throw std::runtime_error("non-finite margin at iteration " + std::to_string(t) +
                                         ", sample " + std::to_string(i));
        }

        IterationRecord rec;
        rec.iteration = t;
        rec.penalized_impurity = 0.5 * fit_sse + tree.total_charged();
        for (int f : tree.features())
            if (!state.selected().count(f)) rec.newly_selected.push_back(f);
        rec.train_logloss = log_loss(ds.labels, margins);

        if (!tree.is_constant() && config.learning_rate <= 0.5 &&
            rec.train_logloss > prev_loss + 1e-9 * std::max(1.0, std::abs(prev_loss))) {
            std::fprintf(stderr, "gbfs: training loss increased at iteration %d (%.12g -> %.12g)\n",
                         t, prev_loss, rec.train_logloss);
        }
        prev_loss = rec.train_logloss;

        state = state.mark_used(tree.features());
        for (int f : rec.newly_selected) model.selected.push_back(f);
        consecutive_constant = tree.is_constant() ? consecutive_constant + 1 : 0;

        model.history.push_back(std::move(rec));
        model.trees.push_back(std::move(tree));
    }
    return model;
}

std::vector<int> selected_features(const Ensemble& model) { return model.selected; }

}  // namespace gbfs
