#pragma once

#include <vector>

#include "gbfs/boosting.hpp"
#include "gbfs/dataset.hpp"

namespace gbfs {

// Diagnostic view of the boosted-space objective for a trained ensemble:
// log-loss, the l1 mass of the step coefficients, and the capped-l1 feature
// penalty with its implied feature count.
struct ObjectiveReport {
    double logloss = 0.0;
    double l1_beta = 0.0;         // alpha * T
    double capped_penalty = 0.0;  // mu * sum_f min(weight_f, eps)
    std::vector<double> feature_weights;
    double implied_feature_count = 0.0;  // sum_f min(weight_f, eps) / eps
};

// sum_i min(|w_i|, eps); eps must be positive.
double capped_l1(const std::vector<double>& w, double eps);

// Per-feature total step weight: alpha times the number of trees using the
// feature.
std::vector<double> feature_weights(const Ensemble& model);

ObjectiveReport gbfs_objective(const Ensemble& model, const Dataset& ds, double mu,
                               double eps);

}  // namespace gbfs
