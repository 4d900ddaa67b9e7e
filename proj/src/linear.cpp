#include "gbfs/linear.hpp"

#include <cmath>
#include <stdexcept>

namespace gbfs {

namespace {

struct Standardized {
    std::vector<std::vector<double>> columns;
    std::vector<double> mean;
    std::vector<double> stddev;  // 1.0 for constant columns
};

Standardized standardize(const Dataset& ds) {
    const int n = ds.n();
    const int d = ds.d();
    Standardized z;
    z.columns.assign(d, std::vector<double>(n));
    z.mean.resize(d);
    z.stddev.resize(d);
    for (int f = 0; f < d; ++f) {
        double m = 0.0;
        for (double v : ds.columns[f]) m += v;
        m /= n;
        double var = 0.0;
        for (double v : ds.columns[f]) var += (v - m) * (v - m);
        double s = std::sqrt(var / n);
        if (s == 0.0) s = 1.0;
        z.mean[f] = m;
        z.stddev[f] = s;
        for (int i = 0; i < n; ++i) z.columns[f][i] = (ds.columns[f][i] - m) / s;
    }
    return z;
}

double smooth_loss(const std::vector<std::vector<double>>& columns,
                   const std::vector<int>& labels, const std::vector<double>& w,
                   double bias, std::vector<double>* grad_w, double* grad_b) {
    const int n = static_cast<int>(labels.size());
    const int d = static_cast<int>(columns.size());
    std::vector<double> margin(n, bias);
    for (int f = 0; f < d; ++f) {
        if (w[f] == 0.0) continue;
        const std::vector<double>& col = columns[f];
        for (int i = 0; i < n; ++i) margin[i] += w[f] * col[i];
    }

    double loss = 0.0;
    std::vector<double> slope(n);  // d loss / d margin
    for (int i = 0; i < n; ++i) {
        const double m = labels[i] * margin[i];
        if (m < -35.0) {
            loss += -m;
            slope[i] = -static_cast<double>(labels[i]);
        } else {
            loss += std::log1p(std::exp(-m));
            slope[i] = -labels[i] / (1.0 + std::exp(m));
        }
    }
    if (grad_w) {
        grad_w->assign(d, 0.0);
        for (int f = 0; f < d; ++f) {
            const std::vector<double>& col = columns[f];
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += slope[i] * col[i];
            (*grad_w)[f] = acc;
        }
    }
    if (grad_b) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += slope[i];
        *grad_b = acc;
    }
    return loss;
}

double l1_norm(const std::vector<double>& w) {
    double total = 0.0;
    for (double v : w) total += std::abs(v);
    return total;
}

}  // namespace

double LinearModel::margin(const std::vector<double>& x) const {
    if (x.size() != weights.size())
        throw std::invalid_argument("input has " + std::to_string(x.size()) +
                                    " features, model expects " + std::to_string(weights.size()));
    double m = bias;
    for (size_t f = 0; f < weights.size(); ++f) m += weights[f] * x[f];
    return m;
}

double soft_threshold(double v, double t) {
    if (t < 0.0) throw std::invalid_argument("threshold must be non-negative");
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

SmoothEval logistic_smooth(const Dataset& ds, const std::vector<double>& w, double bias) {
    if (static_cast<int>(w.size()) != ds.d())
        throw std::invalid_argument("weight vector length does not match dataset");
    SmoothEval out;
    out.loss = smooth_loss(ds.columns, ds.labels, w, bias, &out.grad_w, &out.grad_b);
    return out;
}

double l1lr_lambda_max(const Dataset& ds) {
    const Standardized z = standardize(ds);
    double best = 0.0;
    for (int f = 0; f < ds.d(); ++f) {
        double acc = 0.0;
        for (int i = 0; i < ds.n(); ++i) acc += ds.labels[i] * z.columns[f][i];
        best = std::max(best, std::abs(acc) / 2.0);
    }
    return best;
}

LinearModel l1lr_train(const Dataset& ds, double lambda, int max_iters, double tol) {
    if (lambda < 0.0) throw std::invalid_argument("lambda must be non-negative");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
    ds.validate();

    const int d = ds.d();
    const Standardized z = standardize(ds);

    std::vector<double> w(d, 0.0);
    double b = 0.0;
    std::vector<double> grad_w;
    double grad_b = 0.0;
    double loss = smooth_loss(z.columns, ds.labels, w, b, &grad_w, &grad_b);
    double objective = loss + lambda * l1_norm(w);
    double step = 1.0;

    std::vector<double> w_next(d);
    for (int iter = 0; iter < max_iters; ++iter) {
        double loss_next = 0.0;
        double b_next = 0.0;
        while (true) {
            for (int f = 0; f < d; ++f)
                w_next[f] = soft_threshold(w[f] - step * grad_w[f], step * lambda);
            b_next = b - step * grad_b;

            double lin = 0.0, sq = 0.0;
            for (int f = 0; f < d; ++f) {
                const double delta = w_next[f] - w[f];
                lin += grad_w[f] * delta;
                sq += delta * delta;
            }
            const double db = b_next - b;
            lin += grad_b * db;
            sq += db * db;

            loss_next = smooth_loss(z.columns, ds.labels, w_next, b_next, nullptr, nullptr);
            const double bound = loss + lin + sq / (2.0 * step);
            if (loss_next <= bound + 1e-12 * std::max(1.0, std::abs(loss))) break;
            step /= 2.0;
            if (step < 1e-20)
                throw std::runtime_error("l1lr: backtracking step underflow (data scaling pathology)");
        }

        const double objective_next = loss_next + lambda * l1_norm(w_next);
        if (!std::isfinite(objective_next))
            throw std::runtime_error("l1lr: non-finite objective (data scaling pathology)");

        w.swap(w_next);
        b = b_next;
        const double decrease = objective - objective_next;
        objective = objective_next;
        if (decrease < tol) break;
        loss = smooth_loss(z.columns, ds.labels, w, b, &grad_w, &grad_b);
    }

    // Snap numeric dust to hard zeros; l1 solutions are meant to be sparse and
    // centering noise keeps soft-thresholded weights at ~1e-16 otherwise.
    double w_peak = 0.0;
    for (double v : w) w_peak = std::max(w_peak, std::abs(v));
    for (double& v : w)
        if (std::abs(v) <= 1e-10 * std::max(1.0, w_peak)) v = 0.0;

    LinearModel model;
    model.lambda = lambda;
    model.weights.resize(d);
    model.bias = b;
    for (int f = 0; f < d; ++f) {
        model.weights[f] = w[f] / z.stddev[f];
        model.bias -= w[f] * z.mean[f] / z.stddev[f];
    }
    return model;
}

int l1lr_predict(const LinearModel& model, const std::vector<double>& x) {
    return model.margin(x) < 0.0 ? -1 : +1;
}

}  // namespace gbfs
