#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace gbfs {

// Feature -> bag mapping. Bag ids from the file are kept as names; features
// carry a dense bag index. An entry of -1 means the feature is unassigned.
struct BagAssignment {
    std::vector<int> bag_of;             // per feature, dense bag index or -1
    std::vector<std::string> bag_names;  // dense index -> id string from the file

    int num_bags() const { return static_cast<int>(bag_names.size()); }
};

// JSON format: {"bags": {"<bag id>": [feature indices...], ...}}.
// Every feature in [0,d) must be assigned exactly once.
BagAssignment load_bags(const std::string& path, int d);

// Per-feature base costs with an optional zeroing extension: selecting the
// key feature also makes the listed features free.
struct CustomCostTable {
    std::vector<double> cost;
    std::map<int, std::vector<int>> free_with;
};

// JSON format: {"costs": [d reals], "groups": {"<feature>": [features...]}}.
CustomCostTable load_custom_table(const std::string& path, int d);

// The pending extraction cost of each feature given the selected set.
// Uniform charges 1 for any fresh feature; Bags charges 1 until any feature
// of the same bag is selected; Custom charges the table value until the
// feature (or a group owner listing it) is selected.
class FeatureState {
  public:
    enum class Policy { uniform, bags, custom };

    static FeatureState uniform(int num_features);
    static FeatureState bagged(BagAssignment assignment);
    static FeatureState custom(CustomCostTable table);

    double cost_of(int feature) const;
    FeatureState mark_used(const std::set<int>& features) const;

    const std::set<int>& selected() const { return selected_; }
    int num_features() const { return d_; }
    Policy policy() const { return policy_; }

    // Dense indices of bags touched by the selected set (Bags policy only).
    std::vector<int> touched_bags() const;
    const BagAssignment& bags() const { return bags_; }

  private:
    FeatureState() = default;
    void check_feature(int feature) const;

    Policy policy_ = Policy::uniform;
    int d_ = 0;
    std::set<int> selected_;
    BagAssignment bags_;             // bags policy
    std::vector<char> bag_touched_;  // bags policy, per dense bag index
    CustomCostTable table_;          // custom policy
    std::vector<char> zeroed_;       // custom policy, per feature
};

}  // namespace gbfs
