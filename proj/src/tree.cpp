#include "gbfs/tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace gbfs {

RegressionTree::RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw std::invalid_argument("tree must have at least one node");
}

double RegressionTree::predict(const std::vector<double>& x) const {
    int i = 0;
    while (!nodes_[i].is_leaf()) {
        const TreeNode& nd = nodes_[i];
        i = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
    }
    return nodes_[i].value;
}

double RegressionTree::predict_row(const Dataset& ds, int row) const {
    int i = 0;
    while (!nodes_[i].is_leaf()) {
        const TreeNode& nd = nodes_[i];
        i = ds.columns[nd.feature][row] <= nd.threshold ? nd.left : nd.right;
    }
    return nodes_[i].value;
}

std::set<int> RegressionTree::features() const {
    std::set<int> out;
    for (const TreeNode& nd : nodes_)
        if (!nd.is_leaf()) out.insert(nd.feature);
    return out;
}

int RegressionTree::depth() const {
    std::function<int(int)> walk = [&](int i) -> int {
        const TreeNode& nd = nodes_[i];
        if (nd.is_leaf()) return 0;
        return 1 + std::max(walk(nd.left), walk(nd.right));
    };
    return walk(0);
}

void RegressionTree::scale_leaves(double factor) {
    for (TreeNode& nd : nodes_)
        if (nd.is_leaf()) nd.value *= factor;
}

double RegressionTree::total_charged() const {
    double total = 0.0;
    for (const TreeNode& nd : nodes_)
        if (!nd.is_leaf()) total += nd.charged;
    return total;
}

std::optional<SplitDecision> best_split(const std::vector<int>& rows,
                                        const std::vector<double>& gradients,
                                        const Dataset& ds, const FeatureState& state,
                                        const std::set<int>& tree_used, double mu) {
    const int n = ds.n();
    if (static_cast<int>(gradients.size()) != n)
        throw std::invalid_argument("gradients length " + std::to_string(gradients.size()) +
                                    " does not match n=" + std::to_string(n));
    for (int r : rows)
        if (r < 0 || r >= n)
            throw std::out_of_range("row index " + std::to_string(r) + " outside [0," +
                                    std::to_string(n) + ")");
    const int m = static_cast<int>(rows.size());
    if (m < 2) return std::nullopt;

    double total = 0.0;
    for (int r : rows) total += gradients[r];
    const double parent_term = total * total / m;

    std::optional<SplitDecision> best;
    std::vector<int> order;
    for (int f = 0; f < ds.d(); ++f) {
        const std::vector<double>& col = ds.columns[f];
        order = rows;
        std::sort(order.begin(), order.end(),
                  [&col](int a, int b) { return col[a] < col[b]; });

        const double charge = tree_used.count(f) ? 0.0 : mu * state.cost_of(f);

        double left_sum = 0.0;
        for (int k = 0; k + 1 < m; ++k) {
            left_sum += gradients[order[k]];
            if (col[order[k]] == col[order[k + 1]]) continue;
            const int left_cnt = k + 1;
            const double right_sum = total - left_sum;
            const double raw = 0.5 * (left_sum * left_sum / left_cnt +
                                      right_sum * right_sum / (m - left_cnt) - parent_term);
            const double net = raw - charge;
            if (net > 0.0 && (!best || net > best->gain)) {
                best = SplitDecision{f, 0.5 * (col[order[k]] + col[order[k + 1]]), net, charge};
            }
        }
    }
    return best;
}

RegressionTree fit_tree(const std::vector<double>& gradients, const Dataset& ds,
                        const FeatureState& state, double mu, int depth_limit,
                        int min_leaf) {
    if (depth_limit < 1) throw std::invalid_argument("depth_limit must be >= 1");
    if (min_leaf < 1) throw std::invalid_argument("min_leaf must be >= 1");
    const int n = ds.n();
    if (static_cast<int>(gradients.size()) != n)
        throw std::invalid_argument("gradients length does not match dataset");

    std::vector<TreeNode> nodes;
    std::set<int> tree_used;

    std::function<int(const std::vector<int>&, int)> build =
        [&](const std::vector<int>& rows, int depth) -> int {
        std::optional<SplitDecision> sd;
        if (depth < depth_limit && static_cast<int>(rows.size()) >= 2 * min_leaf)
            sd = best_split(rows, gradients, ds, state, tree_used, mu);

        if (!sd) {
            double sum = 0.0;
            for (int r : rows) sum += gradients[r];
            TreeNode leaf;
            leaf.value = sum / static_cast<double>(rows.size());
            nodes.push_back(leaf);
            return static_cast<int>(nodes.size()) - 1;
        }

        tree_used.insert(sd->feature);
        std::vector<int> left_rows, right_rows;
        const std::vector<double>& col = ds.columns[sd->feature];
        for (int r : rows)
            (col[r] <= sd->threshold ? left_rows : right_rows).push_back(r);

        TreeNode inner;
        inner.feature = sd->feature;
        inner.threshold = sd->threshold;
        inner.gain = sd->gain;
        inner.charged = sd->charged;
        const int me = static_cast<int>(nodes.size());
        nodes.push_back(inner);
        const int li = build(left_rows, depth + 1);
        const int ri = build(right_rows, depth + 1);
        nodes[me].left = li;
        nodes[me].right = ri;
        return me;
    };

    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    build(all, 0);
    return RegressionTree(std::move(nodes));
}

}  // namespace gbfs
