#pragma once

#include <optional>
#include <set>
#include <vector>

#include "gbfs/cost_model.hpp"
#include "gbfs/dataset.hpp"

namespace gbfs {

// The winning split of one node search. `gain` is the impurity reduction net
// of the extraction charge; `charged` is the charge itself (0 when the feature
// is already selected globally or used earlier in the same tree).
struct SplitDecision {
    int feature;
    double threshold;
    double gain;
    double charged;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;   // leaf prediction
    double gain = 0.0;    // fit-time net gain (not serialized)
    double charged = 0.0; // fit-time extraction charge (not serialized)

    bool is_leaf() const { return feature < 0; }
};

// Binary regression tree with axis-aligned splits; values <= threshold route
// left. Node 0 is the root.
class RegressionTree {
  public:
    RegressionTree() = default;
    explicit RegressionTree(std::vector<TreeNode> nodes);

    double predict(const std::vector<double>& x) const;
    double predict_row(const Dataset& ds, int row) const;

    std::set<int> features() const;
    int depth() const;
    bool is_constant() const { return nodes_.size() == 1; }
    const std::vector<TreeNode>& nodes() const { return nodes_; }

    void scale_leaves(double factor);
    double total_charged() const;

  private:
    std::vector<TreeNode> nodes_;
};

// Exhaustive search over every feature and every midpoint between consecutive
// distinct values, maximizing
//   raw_gain - mu * cost_of(state, f) * [f not in tree_used]
// where raw_gain = SSE(rows)/2 - SSE(left)/2 - SSE(right)/2 on the gradients.
// Returns nothing when no candidate has positive net gain. Ties break to the
// lowest feature index, then the lowest threshold.
std::optional<SplitDecision> best_split(const std::vector<int>& rows,
                                        const std::vector<double>& gradients,
                                        const Dataset& ds, const FeatureState& state,
                                        const std::set<int>& tree_used, double mu);

// Greedy depth-first CART on the gradients with per-tree charge accounting:
// a feature is charged at the first node that uses it and is free for the
// rest of the tree. A branch stops at the depth limit, below 2*min_leaf rows,
// or when no split has positive net gain. Leaves predict the gradient mean.
RegressionTree fit_tree(const std::vector<double>& gradients, const Dataset& ds,
                        const FeatureState& state, double mu, int depth_limit,
                        int min_leaf);

}  // namespace gbfs
