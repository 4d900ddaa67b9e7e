#include "gbfs/objective.hpp"

#include <cmath>
#include <stdexcept>

namespace gbfs {

double capped_l1(const std::vector<double>& w, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    double total = 0.0;
    for (double v : w) total += std::min(std::abs(v), eps);
    return total;
}

std::vector<double> feature_weights(const Ensemble& model) {
    std::vector<int> counts(model.num_features, 0);
    for (const RegressionTree& t : model.trees)
        for (int f : t.features()) ++counts[f];
    std::vector<double> out(model.num_features);
    for (int f = 0; f < model.num_features; ++f)
        out[f] = model.learning_rate * counts[f];
    return out;
}

ObjectiveReport gbfs_objective(const Ensemble& model, const Dataset& ds, double mu,
                               double eps) {
    if (ds.d() != model.num_features)
        throw std::invalid_argument("dataset has " + std::to_string(ds.d()) +
                                    " features, model expects " +
                                    std::to_string(model.num_features));
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (mu < 0.0) throw std::invalid_argument("mu must be non-negative");

    ObjectiveReport rep;
    rep.feature_weights = feature_weights(model);
    rep.l1_beta = model.learning_rate * static_cast<double>(model.trees.size());

    std::vector<double> margins(ds.n(), 0.0);
    for (int i = 0; i < ds.n(); ++i) margins[i] = model.predict_margin(ds.row(i));
    rep.logloss = log_loss(ds.labels, margins);

    const double capped = capped_l1(rep.feature_weights, eps);
    rep.capped_penalty = mu * capped;
    rep.implied_feature_count = capped / eps;
    return rep;
}

}  // namespace gbfs
