#include "gbfs/model_io.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace gbfs {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

json node_to_json(const std::vector<TreeNode>& nodes, int idx) {
    const TreeNode& nd = nodes[idx];
    if (nd.is_leaf()) return json{{"leaf", nd.value}};
    return json{{"feature", nd.feature},
                {"threshold", nd.threshold},
                {"left", node_to_json(nodes, nd.left)},
                {"right", node_to_json(nodes, nd.right)}};
}

int node_from_json(const json& j, std::vector<TreeNode>& nodes) {
    if (!j.is_object()) throw std::runtime_error("tree node must be an object");
    TreeNode nd;
    const int me = static_cast<int>(nodes.size());
    if (j.contains("leaf")) {
        nd.value = j.at("leaf").get<double>();
        nodes.push_back(nd);
        return me;
    }
    nd.feature = j.at("feature").get<int>();
    nd.threshold = j.at("threshold").get<double>();
    nodes.push_back(nd);
    const int li = node_from_json(j.at("left"), nodes);
    const int ri = node_from_json(j.at("right"), nodes);
    nodes[me].left = li;
    nodes[me].right = ri;
    return me;
}

}  // namespace

void save_model(const Ensemble& model, const std::string& path) {
    model.validate();
    json doc;
    doc["format_version"] = kFormatVersion;
    doc["kind"] = "gbfs";
    doc["learning_rate"] = model.learning_rate;
    doc["num_features"] = model.num_features;
    doc["feature_names"] = model.feature_names;
    doc["selected"] = model.selected;

    json trees = json::array();
    for (const RegressionTree& t : model.trees) trees.push_back(node_to_json(t.nodes(), 0));
    doc["trees"] = std::move(trees);

    json history = json::array();
    for (const IterationRecord& rec : model.history) {
        history.push_back(json{{"iteration", rec.iteration},
                               {"train_logloss", rec.train_logloss},
                               {"newly_selected", rec.newly_selected},
                               {"penalized_impurity", rec.penalized_impurity}});
    }
    doc["history"] = std::move(history);

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    out << doc.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

void save_model(const LinearModel& model, const std::vector<std::string>& feature_names,
                int num_features, const std::string& path) {
    json doc;
    doc["format_version"] = kFormatVersion;
    doc["kind"] = "linear";
    doc["lambda"] = model.lambda;
    doc["num_features"] = num_features;
    doc["feature_names"] = feature_names;
    doc["weights"] = model.weights;
    doc["bias"] = model.bias;

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    out << doc.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

LoadedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw std::runtime_error("model file is not valid JSON: " + std::string(e.what()));
    }

    LoadedModel out;
    try {
        if (doc.at("format_version").get<int>() != kFormatVersion)
            throw std::runtime_error("unsupported format_version");
        out.kind = doc.at("kind").get<std::string>();
        out.num_features = doc.at("num_features").get<int>();
        if (doc.contains("feature_names"))
            out.feature_names = doc["feature_names"].get<std::vector<std::string>>();

        if (out.kind == "gbfs") {
            Ensemble& m = out.ensemble;
            m.learning_rate = doc.at("learning_rate").get<double>();
            m.num_features = out.num_features;
            m.feature_names = out.feature_names;
            m.selected = doc.at("selected").get<std::vector<int>>();
            for (const json& jt : doc.at("trees")) {
                std::vector<TreeNode> nodes;
                node_from_json(jt, nodes);
                m.trees.emplace_back(std::move(nodes));
            }
            for (const json& jr : doc.at("history")) {
                IterationRecord rec;
                rec.iteration = jr.at("iteration").get<int>();
                rec.train_logloss = jr.at("train_logloss").get<double>();
                rec.newly_selected = jr.at("newly_selected").get<std::vector<int>>();
                rec.penalized_impurity = jr.at("penalized_impurity").get<double>();
                m.history.push_back(std::move(rec));
            }
            m.validate();
        } else if (out.kind == "linear") {
            LinearModel& m = out.linear;
            m.lambda = doc.at("lambda").get<double>();
            m.weights = doc.at("weights").get<std::vector<double>>();
            m.bias = doc.at("bias").get<double>();
            if (static_cast<int>(m.weights.size()) != out.num_features)
                throw std::runtime_error("model invariant: weights length equals num_features");
            for (double v : m.weights)
                if (!std::isfinite(v)) throw std::runtime_error("model invariant: weights finite");
            if (!std::isfinite(m.bias)) throw std::runtime_error("model invariant: bias finite");
        } else {
            throw std::runtime_error("unknown model kind '" + out.kind + "'");
        }
    } catch (const json::exception& e) {
        throw std::runtime_error("malformed model file: " + std::string(e.what()));
    }
    return out;
}

}  // namespace gbfs
