// Command-line front end: train, predict, sweep, report.
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gbfs/boosting.hpp"
#include "gbfs/cost_model.hpp"
#include "gbfs/dataset.hpp"
#include "gbfs/linear.hpp"
#include "gbfs/model_io.hpp"
#include "gbfs/objective.hpp"

namespace {

using namespace gbfs;

constexpr int kExitData = 1;
constexpr int kExitFlags = 2;

struct SharedOpts {
    std::string data;
    std::string format = "csv";
    std::string label_column = "label";
    std::string test;
    double split_fraction = 0.0;  // 0 means unset
    unsigned long long seed = 13;
    std::string bags;
    std::string model;
};

struct GbfsOpts {
    double mu = 0.0;
    int iters = 2000;
    int depth = 4;
    double learning_rate = 0.1;
    int min_leaf = 1;
};

void add_shared(CLI::App* cmd, SharedOpts& o, bool need_data) {
    auto* data = cmd->add_option("--data", o.data, "input data file");
    if (need_data) data->required();
    cmd->add_option("--format", o.format, "data format")
        ->check(CLI::IsMember({"csv", "libsvm"}));
    cmd->add_option("--label-column", o.label_column, "label column name or index (csv)");
    cmd->add_option("--test", o.test, "held-out test data file");
    cmd->add_option("--split", o.split_fraction, "train fraction for a random split");
    cmd->add_option("--seed", o.seed, "seed for all randomness");
    cmd->add_option("--bags", o.bags, "bag assignment JSON (selects the bag cost policy)");
    cmd->add_option("--model", o.model, "model JSON path");
}

void add_gbfs(CLI::App* cmd, GbfsOpts& o) {
    cmd->add_option("--mu", o.mu, "feature extraction trade-off");
    cmd->add_option("--iters", o.iters, "boosting iterations cap");
    cmd->add_option("--depth", o.depth, "tree depth limit");
    cmd->add_option("--learning-rate", o.learning_rate, "step size");
    cmd->add_option("--min-leaf", o.min_leaf, "minimum rows per leaf");
}

int check_gbfs_flags(const GbfsOpts& o) {
    if (o.mu < 0.0) {
        std::cerr << "mu must be non-negative\n";
        return kExitFlags;
    }
    if (o.iters < 1) {
        std::cerr << "iters must be >= 1\n";
        return kExitFlags;
    }
    if (!(o.learning_rate > 0.0 && o.learning_rate <= 1.0)) {
        std::cerr << "learning-rate must be in (0,1]\n";
        return kExitFlags;
    }
    if (o.depth < 1) {
        std::cerr << "depth must be >= 1\n";
        return kExitFlags;
    }
    if (o.min_leaf < 1) {
        std::cerr << "min-leaf must be >= 1\n";
        return kExitFlags;
    }
    return 0;
}

Dataset load_data(const SharedOpts& o, const std::string& path) {
    if (o.format == "libsvm") return load_libsvm(path);
    return load_csv(path, o.label_column);
}

// Returns train/test; test is empty when neither --test nor --split is given.
std::pair<Dataset, std::optional<Dataset>> load_train_test(const SharedOpts& o) {
    Dataset full = load_data(o, o.data);
    if (!o.test.empty()) {
        Dataset test = load_data(o, o.test);
        if (test.d() != full.d())
            throw std::runtime_error("train data has " + std::to_string(full.d()) +
                                     " features but test data has " + std::to_string(test.d()));
        return {std::move(full), std::move(test)};
    }
    if (o.split_fraction > 0.0) {
        auto [train, test] = split(full, o.split_fraction, o.seed);
        return {std::move(train), std::move(test)};
    }
    return {std::move(full), std::nullopt};
}

FeatureState make_state(const SharedOpts& o, int d) {
    if (!o.bags.empty()) return FeatureState::bagged(load_bags(o.bags, d));
    return FeatureState::uniform(d);
}

double error_rate_gbfs(const Ensemble& m, const Dataset& ds) {
    int wrong = 0;
    for (int i = 0; i < ds.n(); ++i) wrong += m.classify(ds.row(i)) != ds.labels[i];
    return static_cast<double>(wrong) / ds.n();
}

double error_rate_linear(const LinearModel& m, const Dataset& ds) {
    int wrong = 0;
    for (int i = 0; i < ds.n(); ++i) wrong += l1lr_predict(m, ds.row(i)) != ds.labels[i];
    return static_cast<double>(wrong) / ds.n();
}

std::string fmt(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// train

int run_train(const SharedOpts& shared, const GbfsOpts& gopts, const std::string& method,
              double lambda, bool lambda_set) {
    if (method == "l1lr" && !lambda_set) {
        std::cerr << "--lambda is required with --method l1lr\n";
        return kExitFlags;
    }
    if (lambda < 0.0) {
        std::cerr << "lambda must be non-negative\n";
        return kExitFlags;
    }
    if (int rc = check_gbfs_flags(gopts)) return rc;

    auto [train_ds, test_ds] = load_train_test(shared);

    if (method == "l1lr") {
        LinearModel model = l1lr_train(train_ds, lambda);
        int nnz = 0;
        for (double w : model.weights) nnz += w != 0.0;
        if (!shared.model.empty())
            save_model(model, train_ds.feature_names, train_ds.d(), shared.model);
        std::cout << "selected=" << nnz << " train_error=" << fmt(error_rate_linear(model, train_ds));
        if (test_ds) std::cout << " test_error=" << fmt(error_rate_linear(model, *test_ds));
        std::cout << "\n";
        return 0;
    }

    GbfsConfig cfg;
    cfg.mu = gopts.mu;
    cfg.iterations = gopts.iters;
    cfg.depth = gopts.depth;
    cfg.learning_rate = gopts.learning_rate;
    cfg.min_leaf = gopts.min_leaf;
    cfg.seed = shared.seed;

    Ensemble model = train(train_ds, cfg, make_state(shared, train_ds.d()));
    if (!shared.model.empty()) save_model(model, shared.model);
    std::cout << "selected=" << model.selected.size()
              << " train_error=" << fmt(error_rate_gbfs(model, train_ds));
    if (test_ds) std::cout << " test_error=" << fmt(error_rate_gbfs(model, *test_ds));
    std::cout << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// predict

int run_predict(const SharedOpts& shared, bool margins, const std::string& output) {
    if (shared.model.empty()) {
        std::cerr << "--model is required\n";
        return kExitFlags;
    }
    LoadedModel loaded = load_model(shared.model);
    Dataset ds = load_data(shared, shared.data);
    if (ds.d() != loaded.num_features)
        throw std::runtime_error("model expects " + std::to_string(loaded.num_features) +
                                 " features but data has " + std::to_string(ds.d()));

    std::ofstream file;
    if (!output.empty()) {
        file.open(output);
        if (!file) throw std::runtime_error("cannot write " + output);
    }
    std::ostream& out = output.empty() ? std::cout : file;

    int wrong = 0;
    for (int i = 0; i < ds.n(); ++i) {
        const std::vector<double> x = ds.row(i);
        if (loaded.kind == "gbfs") {
            if (margins)
                out << fmt(loaded.ensemble.predict_margin(x)) << '\n';
            else
                out << loaded.ensemble.classify(x) << '\n';
            wrong += loaded.ensemble.classify(x) != ds.labels[i];
        } else {
            if (margins)
                out << fmt(loaded.linear.margin(x)) << '\n';
            else
                out << l1lr_predict(loaded.linear, x) << '\n';
            wrong += l1lr_predict(loaded.linear, x) != ds.labels[i];
        }
    }
    std::cerr << "error=" << fmt(static_cast<double>(wrong) / ds.n()) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// sweep

std::vector<double> parse_grid(const std::string& csv) {
    std::vector<double> grid;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument("bad mu value '" + tok + "'");
        grid.push_back(v);
    }
    if (grid.empty()) throw std::invalid_argument("empty mu grid");
    return grid;
}

int run_sweep(const SharedOpts& shared, const GbfsOpts& gopts, const std::string& grid_csv,
              const std::string& out_path) {
    if (int rc = check_gbfs_flags(gopts)) return rc;
    std::vector<double> grid;
    try {
        grid = parse_grid(grid_csv);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kExitFlags;
    }
    for (double mu : grid)
        if (mu < 0.0) {
            std::cerr << "mu must be non-negative\n";
            return kExitFlags;
        }
    if (shared.test.empty() && shared.split_fraction <= 0.0) {
        std::cerr << "sweep needs --test or --split\n";
        return kExitFlags;
    }
    std::sort(grid.begin(), grid.end());

    auto [train_ds, test_opt] = load_train_test(shared);
    const Dataset& test_ds = *test_opt;

    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << "mu,iters,num_selected,train_error,test_error\n";

    for (double mu : grid) {
        GbfsConfig cfg;
        cfg.mu = mu;
        cfg.iterations = gopts.iters;
        cfg.depth = gopts.depth;
        cfg.learning_rate = gopts.learning_rate;
        cfg.min_leaf = gopts.min_leaf;
        cfg.seed = shared.seed;

        Ensemble model = train(train_ds, cfg, make_state(shared, train_ds.d()));

        // walk the prefix ensembles once, emitting rows at power-of-two
        // checkpoints and at the final tree
        std::vector<double> train_margin(train_ds.n(), 0.0);
        std::vector<double> test_margin(test_ds.n(), 0.0);
        int selected_so_far = 0;
        const int total = static_cast<int>(model.trees.size());
        for (int t = 0; t < total; ++t) {
            for (int i = 0; i < train_ds.n(); ++i)
                train_margin[i] += cfg.learning_rate * model.trees[t].predict_row(train_ds, i);
            for (int i = 0; i < test_ds.n(); ++i)
                test_margin[i] += cfg.learning_rate * model.trees[t].predict_row(test_ds, i);
            selected_so_far += static_cast<int>(model.history[t].newly_selected.size());

            const int iter = t + 1;
            const bool power_of_two = (iter & (iter - 1)) == 0;
            if (!power_of_two && iter != total) continue;

            int train_wrong = 0, test_wrong = 0;
            for (int i = 0; i < train_ds.n(); ++i)
                train_wrong += (train_margin[i] < 0 ? -1 : +1) != train_ds.labels[i];
            for (int i = 0; i < test_ds.n(); ++i)
                test_wrong += (test_margin[i] < 0 ? -1 : +1) != test_ds.labels[i];
            out << fmt(mu) << ',' << iter << ',' << selected_so_far << ','
                << fmt(static_cast<double>(train_wrong) / train_ds.n()) << ','
                << fmt(static_cast<double>(test_wrong) / test_ds.n()) << '\n';
        }
    }
    if (!out) throw std::runtime_error("write failed: " + out_path);
    return 0;
}

// ---------------------------------------------------------------------------
// report

int run_report(const SharedOpts& shared, double mu, double eps, const std::string& out_path) {
    if (shared.model.empty()) {
        std::cerr << "--model is required\n";
        return kExitFlags;
    }
    if (mu < 0.0) {
        std::cerr << "mu must be non-negative\n";
        return kExitFlags;
    }
    LoadedModel loaded = load_model(shared.model);
    if (loaded.kind != "gbfs") throw std::runtime_error("report requires a gbfs model");
    const Ensemble& model = loaded.ensemble;
    if (eps <= 0.0) eps = model.learning_rate;

    nlohmann::json doc;
    doc["selected"] = model.selected;
    doc["feature_weights"] = feature_weights(model);

    nlohmann::json hist = nlohmann::json::array();
    for (const IterationRecord& rec : model.history)
        hist.push_back({{"iteration", rec.iteration},
                        {"train_logloss", rec.train_logloss},
                        {"newly_selected", rec.newly_selected},
                        {"penalized_impurity", rec.penalized_impurity}});
    doc["history"] = std::move(hist);

    nlohmann::json obj;
    obj["l1_beta"] = model.learning_rate * static_cast<double>(model.trees.size());
    obj["capped_penalty"] = mu * capped_l1(feature_weights(model), eps);
    obj["implied_feature_count"] = capped_l1(feature_weights(model), eps) / eps;
    if (!shared.data.empty()) {
        Dataset ds = load_data(shared, shared.data);
        ObjectiveReport rep = gbfs_objective(model, ds, mu, eps);
        obj["logloss"] = rep.logloss;
    }
    doc["objective"] = std::move(obj);

    if (!shared.bags.empty()) {
        BagAssignment bags = load_bags(shared.bags, model.num_features);
        std::set<std::string> touched;
        for (int f : model.selected) touched.insert(bags.bag_names[bags.bag_of[f]]);
        doc["bags_touched"] = touched;
    }

    const std::string text = doc.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot write " + out_path);
        out << text;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gradient boosted feature selection"};
    app.require_subcommand(1);

    SharedOpts train_shared, predict_shared, sweep_shared, report_shared;
    GbfsOpts train_gopts, sweep_gopts;
    std::string method = "gbfs";
    double lambda = 0.0;
    bool margins = false;
    std::string predict_output;
    std::string grid_csv = "0.125,0.25,0.5,1,2,4,8,32,128,512";
    std::string sweep_out = "sweep.csv";
    double report_mu = 1.0, report_eps = 0.0;
    std::string report_out;

    CLI::App* ctrain = app.add_subcommand("train", "train a model and write model JSON");
    add_shared(ctrain, train_shared, true);
    add_gbfs(ctrain, train_gopts);
    ctrain->add_option("--method", method, "gbfs or l1lr")
        ->check(CLI::IsMember({"gbfs", "l1lr"}));
    auto* lambda_opt = ctrain->add_option("--lambda", lambda, "l1 penalty for l1lr");

    CLI::App* cpredict = app.add_subcommand("predict", "write one label (or margin) per line");
    add_shared(cpredict, predict_shared, true);
    cpredict->add_flag("--margins", margins, "emit raw margins instead of labels");
    cpredict->add_option("--output", predict_output, "write predictions here instead of stdout");

    CLI::App* csweep = app.add_subcommand("sweep", "error/feature curves over a mu grid");
    add_shared(csweep, sweep_shared, true);
    add_gbfs(csweep, sweep_gopts);
    csweep->add_option("--mu-grid", grid_csv, "comma-separated mu values");
    csweep->add_option("--out", sweep_out, "output CSV path");

    CLI::App* creport = app.add_subcommand("report", "diagnostics for a trained model");
    add_shared(creport, report_shared, false);
    creport->add_option("--mu", report_mu, "penalty weight for the objective");
    creport->add_option("--eps", report_eps, "cap threshold (default: learning rate)");
    creport->add_option("--out", report_out, "write JSON here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitFlags;
    }

    try {
        if (ctrain->parsed())
            return run_train(train_shared, train_gopts, method, lambda, lambda_opt->count() > 0);
        if (cpredict->parsed()) return run_predict(predict_shared, margins, predict_output);
        if (csweep->parsed()) return run_sweep(sweep_shared, sweep_gopts, grid_csv, sweep_out);
        if (creport->parsed()) return run_report(report_shared, report_mu, report_eps, report_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return 0;
}
