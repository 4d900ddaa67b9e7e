#pragma once

#include <vector>

#include "gbfs/dataset.hpp"

namespace gbfs {

// l1-regularized logistic regression, the linear comparator. Weights and bias
// are in the original feature scale even though the solver standardizes
// internally.
struct LinearModel {
    std::vector<double> weights;
    double bias = 0.0;
    double lambda = 0.0;

    double margin(const std::vector<double>& x) const;
};

// sign(v) * max(|v| - t, 0); t must be non-negative.
double soft_threshold(double v, double t);

// Smooth part of the objective (sum of log-losses) and its gradient at (w, b),
// evaluated on the given dataset without any standardization.
struct SmoothEval {
    double loss = 0.0;
    std::vector<double> grad_w;
    double grad_b = 0.0;
};
SmoothEval logistic_smooth(const Dataset& ds, const std::vector<double>& w, double bias);

// Smallest lambda at which the trained solution is exactly zero:
// max_f |sum_i y_i x~_if| / 2 over internally standardized columns.
double l1lr_lambda_max(const Dataset& ds);

// Proximal gradient with backtracking on the smooth part; the bias is
// unpenalized. Stops when the objective decrease drops below tol or after
// max_iters steps.
LinearModel l1lr_train(const Dataset& ds, double lambda, int max_iters = 1000,
                       double tol = 1e-9);

// sign(w.x + b); a zero score maps to +1.
int l1lr_predict(const LinearModel& model, const std::vector<double>& x);

}  // namespace gbfs
