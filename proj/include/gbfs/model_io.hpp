#pragma once

#include <string>
#include <vector>

#include "gbfs/boosting.hpp"
#include "gbfs/linear.hpp"

namespace gbfs {

// One JSON envelope for both model kinds, discriminated by "kind".
struct LoadedModel {
    std::string kind;  // "gbfs" or "linear"
    Ensemble ensemble;
    LinearModel linear;
    std::vector<std::string> feature_names;
    int num_features = 0;
};

void save_model(const Ensemble& model, const std::string& path);
void save_model(const LinearModel& model, const std::vector<std::string>& feature_names,
                int num_features, const std::string& path);

// Parses and re-validates every model invariant; throws naming the first
// failure.
LoadedModel load_model(const std::string& path);

}  // namespace gbfs
