#include "gbfs/cost_model.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace gbfs {

using nlohmann::json;

BagAssignment load_bags(const std::string& path, int d) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open bag file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw std::runtime_error("bag file is not valid JSON: " + std::string(e.what()));
    }
    if (!doc.is_object() || !doc.contains("bags") || !doc["bags"].is_object())
        throw std::runtime_error("bag file must be an object with a \"bags\" object");

    BagAssignment out;
    out.bag_of.assign(d, -1);
    for (auto& [bag_id, members] : doc["bags"].items()) {
        if (!members.is_array())
            throw std::runtime_error("bag '" + bag_id + "' must map to an array of feature indices");
        const int dense = out.num_bags();
        out.bag_names.push_back(bag_id);
        for (const auto& m : members) {
            if (!m.is_number_integer())
                throw std::runtime_error("bag '" + bag_id + "' contains a non-integer feature index");
            const int f = m.get<int>();
            if (f < 0 || f >= d)
                throw std::runtime_error("bag '" + bag_id + "' lists feature " + std::to_string(f) +
                                         " outside [0," + std::to_string(d) + ")");
            if (out.bag_of[f] != -1)
                throw std::runtime_error("feature " + std::to_string(f) + " assigned to both bag '" +
                                         out.bag_names[out.bag_of[f]] + "' and bag '" + bag_id + "'");
            out.bag_of[f] = dense;
        }
    }
    for (int f = 0; f < d; ++f)
        if (out.bag_of[f] == -1)
            throw std::runtime_error("feature " + std::to_string(f) + " is not assigned to any bag");
    return out;
}

CustomCostTable load_custom_table(const std::string& path, int d) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open cost table: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw std::runtime_error("cost table is not valid JSON: " + std::string(e.what()));
    }
    if (!doc.is_object() || !doc.contains("costs") || !doc["costs"].is_array())
        throw std::runtime_error("cost table must be an object with a \"costs\" array");
    if (static_cast<int>(doc["costs"].size()) != d)
        throw std::runtime_error("cost table has " + std::to_string(doc["costs"].size()) +
                                 " costs, expected " + std::to_string(d));

    CustomCostTable table;
    table.cost.reserve(d);
    for (const auto& c : doc["costs"]) {
        const double v = c.get<double>();
        if (v < 0.0) throw std::runtime_error("cost table contains a negative cost");
        table.cost.push_back(v);
    }
    if (doc.contains("groups")) {
        for (auto& [key, members] : doc["groups"].items()) {
            const int owner = std::stoi(key);
            if (owner < 0 || owner >= d)
                throw std::runtime_error("group owner " + key + " outside [0," + std::to_string(d) + ")");
            std::vector<int> fs;
            for (const auto& m : members) {
                const int f = m.get<int>();
                if (f < 0 || f >= d)
                    throw std::runtime_error("group for " + key + " lists feature " + std::to_string(f) +
                                             " outside [0," + std::to_string(d) + ")");
                fs.push_back(f);
            }
            table.free_with[owner] = std::move(fs);
        }
    }
    return table;
}

FeatureState FeatureState::uniform(int num_features) {
    if (num_features < 1) throw std::invalid_argument("num_features must be >= 1");
    FeatureState s;
    s.policy_ = Policy::uniform;
    s.d_ = num_features;
    return s;
}

FeatureState FeatureState::bagged(BagAssignment assignment) {
    if (assignment.bag_of.empty()) throw std::invalid_argument("empty bag assignment");
    FeatureState s;
    s.policy_ = Policy::bags;
    s.d_ = static_cast<int>(assignment.bag_of.size());
    s.bag_touched_.assign(assignment.num_bags(), 0);
    s.bags_ = std::move(assignment);
    return s;
}

FeatureState FeatureState::custom(CustomCostTable table) {
    if (table.cost.empty()) throw std::invalid_argument("empty cost table");
    FeatureState s;
    s.policy_ = Policy::custom;
    s.d_ = static_cast<int>(table.cost.size());
    s.zeroed_.assign(s.d_, 0);
    s.table_ = std::move(table);
    return s;
}

void FeatureState::check_feature(int feature) const {
    if (feature < 0 || feature >= d_)
        throw std::out_of_range("feature index " + std::to_string(feature) + " outside [0," +
                                std::to_string(d_) + ")");
}

double FeatureState::cost_of(int feature) const {
    check_feature(feature);
    switch (policy_) {
        case Policy::uniform:
            return selected_.count(feature) ? 0.0 : 1.0;
        case Policy::bags: {
            const int bag = bags_.bag_of[feature];
            if (bag < 0)
                throw std::runtime_error("feature " + std::to_string(feature) +
                                         " missing from bag assignment");
            return bag_touched_[bag] ? 0.0 : 1.0;
        }
        case Policy::custom:
            return zeroed_[feature] ? 0.0 : table_.cost[feature];
    }
    return 0.0;  // unreachable
}

FeatureState FeatureState::mark_used(const std::set<int>& features) const {
    FeatureState next = *this;
    for (int f : features) {
        check_feature(f);
        next.selected_.insert(f);
        switch (policy_) {
            case Policy::uniform:
                break;
            case Policy::bags: {
                const int bag = bags_.bag_of[f];
                if (bag >= 0) next.bag_touched_[bag] = 1;
                break;
            }
            case Policy::custom: {
                next.zeroed_[f] = 1;
                if (auto it = table_.free_with.find(f); it != table_.free_with.end())
                    for (int g : it->second) next.zeroed_[g] = 1;
                break;
            }
        }
    }
    return next;
}

std::vector<int> FeatureState::touched_bags() const {
    std::vector<int> out;
    for (size_t b = 0; b < bag_touched_.size(); ++b)
        if (bag_touched_[b]) out.push_back(static_cast<int>(b));
    return out;
}

}  // namespace gbfs
