#include <doctest.h>

#include <cmath>
#include <map>

#include "gbfs/tree.hpp"
#include "oracles.hpp"

using gbfs::Dataset;
using gbfs::FeatureState;
using gbfs::RegressionTree;

namespace {

Dataset single_feature(const std::vector<double>& values) {
    Dataset ds;
    ds.columns = {values};
    ds.labels.assign(values.size(), 1);
    return ds;
}

std::vector<int> all_rows(const Dataset& ds) {
    std::vector<int> rows(ds.n());
    for (int i = 0; i < ds.n(); ++i) rows[i] = i;
    return rows;
}

}  // namespace

TEST_CASE("best_split finds the step boundary") {
    Dataset ds = single_feature({0, 1, 2, 3});
    const std::vector<double> g = {1, 1, -1, -1};
    FeatureState state = FeatureState::uniform(1);

    auto sd = gbfs::best_split(all_rows(ds), g, ds, state, {}, 0.0);
    REQUIRE(sd.has_value());
    CHECK(sd->feature == 0);
    CHECK(sd->threshold == doctest::Approx(1.5));
    CHECK(sd->gain == doctest::Approx(2.0));
    CHECK(sd->charged == 0.0);
}

TEST_CASE("best_split returns none when the charge dominates") {
    Dataset ds = single_feature({0, 1, 2, 3});
    const std::vector<double> g = {1, 1, -1, -1};
    FeatureState state = FeatureState::uniform(1);
    CHECK(!gbfs::best_split(all_rows(ds), g, ds, state, {}, 3.0).has_value());
}

TEST_CASE("features already selected carry no charge") {
    Dataset ds = single_feature({0, 1, 2, 3});
    const std::vector<double> g = {1, 1, -1, -1};
    FeatureState state = FeatureState::uniform(1).mark_used({0});
    auto sd = gbfs::best_split(all_rows(ds), g, ds, state, {}, 3.0);
    REQUIRE(sd.has_value());
    CHECK(sd->threshold == doctest::Approx(1.5));
    CHECK(sd->gain == doctest::Approx(2.0));
    CHECK(sd->charged == 0.0);
}

TEST_CASE("features used earlier in the tree carry no charge") {
    Dataset ds = single_feature({0, 1, 2, 3});
    const std::vector<double> g = {1, 1, -1, -1};
    FeatureState state = FeatureState::uniform(1);
    auto sd = gbfs::best_split(all_rows(ds), g, ds, state, {0}, 3.0);
    REQUIRE(sd.has_value());
    CHECK(sd->gain == doctest::Approx(2.0));
    CHECK(sd->charged == 0.0);
}

TEST_CASE("best_split validates inputs") {
    Dataset ds = single_feature({0, 1, 2});
    FeatureState state = FeatureState::uniform(1);
    CHECK_THROWS_AS(gbfs::best_split({0, 1}, {1.0, -1.0}, ds, state, {}, 0.0),
                    std::invalid_argument);  // gradients shorter than n
    CHECK_THROWS_AS(gbfs::best_split({0, 7}, {1.0, -1.0, 0.0}, ds, state, {}, 0.0),
                    std::out_of_range);
}

TEST_CASE("best_split agrees with brute force over random instances") {
    std::mt19937_64 rng(2024);
    const double mus[] = {0.0, 0.1, 10.0};
    int found = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 63);
        const int d = 1 + static_cast<int>(rng() % 6);
        Dataset ds = oracle::random_dataset(rng, n, d);
        if (trial % 3 == 0) {
            // duplicate values exercise the distinct-boundary rule
            for (int f = 0; f < d; ++f)
                for (int i = 0; i < n; ++i)
                    ds.columns[f][i] = std::round(ds.columns[f][i] * 2.0) / 2.0;
        }
        std::vector<double> g(n);
        for (int i = 0; i < n; ++i) g[i] = oracle::uniform(rng, -1.0, 1.0);

        FeatureState state = FeatureState::uniform(d);
        std::set<int> omega;
        for (int f = 0; f < d; ++f)
            if (oracle::unit_draw(rng) < 0.3) omega.insert(f);
        state = state.mark_used(omega);
        std::set<int> tree_used;
        for (int f = 0; f < d; ++f)
            if (oracle::unit_draw(rng) < 0.2) tree_used.insert(f);

        const double mu = mus[trial % 3];
        auto got = gbfs::best_split(all_rows(ds), g, ds, state, tree_used, mu);
        auto want = oracle::brute_force_best_split(all_rows(ds), g, ds, state, tree_used, mu);
        REQUIRE(got.has_value() == want.has_value());
        if (got) {
            ++found;
            CHECK(got->feature == want->feature);
            CHECK(got->threshold == want->threshold);
            CHECK(got->gain == doctest::Approx(want->gain).epsilon(1e-12));
        }
    }
    CHECK(found > 50);  // the suite must actually exercise the split path
}

TEST_CASE("constant gradients give a single-leaf tree") {
    Dataset ds = single_feature({0, 1, 2, 3});
    const std::vector<double> g = {0.25, 0.25, 0.25, 0.25};
    RegressionTree t = gbfs::fit_tree(g, ds, FeatureState::uniform(1), 0.0, 3, 1);
    CHECK(t.is_constant());
    CHECK(t.predict({9.0}) == doctest::Approx(0.25));
    CHECK(t.features().empty());
}

TEST_CASE("fit_tree reduces XOR gradients against the exhaustive depth-2 oracle") {
    Dataset ds = gbfs::make_synthetic_xor(64, 5);
    std::vector<double> g(ds.n());
    double mean = 0.0;
    for (int i = 0; i < ds.n(); ++i) mean += ds.labels[i];
    mean /= ds.n();
    double var = 0.0;
    for (int i = 0; i < ds.n(); ++i) {
        g[i] = ds.labels[i];
        var += (g[i] - mean) * (g[i] - mean);
    }

    RegressionTree t = gbfs::fit_tree(g, ds, FeatureState::uniform(3), 0.0, 2, 1);
    double sse = 0.0;
    for (int i = 0; i < ds.n(); ++i) {
        const double p = t.predict_row(ds, i);
        sse += (g[i] - p) * (g[i] - p);
    }
    CHECK(sse < var);
    CHECK(t.depth() <= 2);
    CHECK(!t.features().empty());

    // exhaustive depth-2 search: every (root, left, right) split combination
    auto leaf_sse = [&](const std::vector<int>& rows) { return oracle::sse(g, rows); };
    auto best_one_level = [&](const std::vector<int>& rows) {
        double best = leaf_sse(rows);  // allowed to stay a leaf
        for (int f = 0; f < ds.d(); ++f) {
            std::vector<double> vals;
            for (int r : rows) vals.push_back(ds.columns[f][r]);
            std::sort(vals.begin(), vals.end());
            vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
            for (size_t k = 0; k + 1 < vals.size(); ++k) {
                const double thr = 0.5 * (vals[k] + vals[k + 1]);
                std::vector<int> l, r2;
                for (int r : rows) (ds.columns[f][r] <= thr ? l : r2).push_back(r);
                best = std::min(best, leaf_sse(l) + leaf_sse(r2));
            }
        }
        return best;
    };
    double exhaustive = leaf_sse(all_rows(ds));
    for (int f = 0; f < ds.d(); ++f) {
        std::vector<double> vals = ds.columns[f];
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        for (size_t k = 0; k + 1 < vals.size(); ++k) {
            const double thr = 0.5 * (vals[k] + vals[k + 1]);
            std::vector<int> l, r2;
            for (int i = 0; i < ds.n(); ++i)
                (ds.columns[f][i] <= thr ? l : r2).push_back(i);
            exhaustive = std::min(exhaustive, best_one_level(l) + best_one_level(r2));
        }
    }
    CHECK(sse >= exhaustive - 1e-12);       // greedy cannot beat the oracle
    CHECK(exhaustive < var);                // the pattern is depth-2 expressible
    CHECK(sse <= 0.9 * var);                // and greedy captures a real share
}

TEST_CASE("a charge above half the gradient energy forces a single leaf") {
    std::mt19937_64 rng(99);
    Dataset ds = oracle::random_dataset(rng, 32, 4);
    std::vector<double> g(ds.n());
    double energy = 0.0;
    for (int i = 0; i < ds.n(); ++i) {
        g[i] = oracle::uniform(rng, -1.0, 1.0);
        energy += g[i] * g[i];
    }
    const double mu = 0.5 * energy + 0.1;
    RegressionTree t = gbfs::fit_tree(g, ds, FeatureState::uniform(4), mu, 4, 1);
    CHECK(t.is_constant());
}

TEST_CASE("raw gain is bounded by half the gradient energy") {
    std::mt19937_64 rng(55);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 4 + static_cast<int>(rng() % 40);
        Dataset ds = oracle::random_dataset(rng, n, 3);
        std::vector<double> g(n);
        double energy = 0.0;
        for (int i = 0; i < n; ++i) {
            g[i] = oracle::uniform(rng, -1.0, 1.0);
            energy += g[i] * g[i];
        }
        auto sd = gbfs::best_split(all_rows(ds), g, ds, FeatureState::uniform(3), {}, 0.0);
        if (sd) CHECK(sd->gain <= 0.5 * energy + 1e-12);
    }
}

TEST_CASE("tree prediction routes <= left") {
    std::vector<gbfs::TreeNode> nodes(3);
    nodes[0].feature = 0;
    nodes[0].threshold = 1.5;
    nodes[0].left = 1;
    nodes[0].right = 2;
    nodes[1].value = -1.0;
    nodes[2].value = +1.0;
    RegressionTree stump((std::vector<gbfs::TreeNode>(nodes)));
    CHECK(stump.predict({2.0}) == 1.0);
    CHECK(stump.predict({1.5}) == -1.0);  // boundary goes left
    CHECK(stump.predict({0.0}) == -1.0);
    CHECK(stump.features() == std::set<int>{0});
    CHECK(stump.depth() == 1);
}

TEST_CASE("tree_features uses set semantics over repeated splits") {
    std::mt19937_64 rng(4);
    Dataset ds = oracle::random_dataset(rng, 48, 8);
    std::vector<double> g(ds.n());
    for (int i = 0; i < ds.n(); ++i) g[i] = oracle::uniform(rng, -1.0, 1.0);
    RegressionTree t = gbfs::fit_tree(g, ds, FeatureState::uniform(8), 0.0, 3, 1);
    int internal = 0;
    for (const auto& nd : t.nodes()) internal += !nd.is_leaf();
    CHECK(static_cast<int>(t.features().size()) <= internal);
}

TEST_CASE("per-tree charge soundness: each new feature charged exactly once") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 16 + static_cast<int>(rng() % 48);
        const int d = 2 + static_cast<int>(rng() % 5);
        Dataset ds = oracle::random_dataset(rng, n, d);
        std::vector<double> g(n);
        for (int i = 0; i < n; ++i) g[i] = oracle::uniform(rng, -1.0, 1.0);
        FeatureState state = FeatureState::uniform(d);
        if (trial % 2) state = state.mark_used({0});
        const double mu = 0.05;

        gbfs::RegressionTree t = gbfs::fit_tree(g, ds, state, mu, 4, 1);
        double expected = 0.0;
        for (int f : t.features())
            if (!state.selected().count(f)) expected += mu * 1.0;
        CHECK(t.total_charged() == doctest::Approx(expected).epsilon(1e-12));

        // no feature charged twice: count positive charges per feature
        std::map<int, int> charges;
        for (const auto& nd : t.nodes())
            if (!nd.is_leaf() && nd.charged > 0.0) charges[nd.feature]++;
        for (const auto& [f, c] : charges) {
            (void)f;
            CHECK(c == 1);
        }
    }
}

TEST_CASE("leaf means are optimal for the fitted structure") {
    std::mt19937_64 rng(8);
    Dataset ds = oracle::random_dataset(rng, 40, 4);
    std::vector<double> g(ds.n());
    for (int i = 0; i < ds.n(); ++i) g[i] = oracle::uniform(rng, -1.0, 1.0);
    RegressionTree t = gbfs::fit_tree(g, ds, FeatureState::uniform(4), 0.0, 3, 1);

    auto sse_of = [&](const RegressionTree& tree) {
        double s = 0.0;
        for (int i = 0; i < ds.n(); ++i) {
            const double p = tree.predict_row(ds, i);
            s += (g[i] - p) * (g[i] - p);
        }
        return s;
    };
    const double base = sse_of(t);
    for (size_t k = 0; k < t.nodes().size(); ++k) {
        if (!t.nodes()[k].is_leaf()) continue;
        for (double delta : {-0.05, 0.05}) {
            std::vector<gbfs::TreeNode> mutated = t.nodes();
            mutated[k].value += delta;
            RegressionTree other(std::move(mutated));
            CHECK(sse_of(other) > base);
        }
    }
}

TEST_CASE("every internal node records positive net gain") {
    std::mt19937_64 rng(10);
    Dataset ds = oracle::random_dataset(rng, 50, 5);
    std::vector<double> g(ds.n());
    for (int i = 0; i < ds.n(); ++i) g[i] = oracle::uniform(rng, -1.0, 1.0);
    RegressionTree t = gbfs::fit_tree(g, ds, FeatureState::uniform(5), 0.2, 4, 1);
    for (const auto& nd : t.nodes())
        if (!nd.is_leaf()) CHECK(nd.gain > 0.0);
}

TEST_CASE("mu = 0 reproduces the plain CART fit exactly") {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 10 + static_cast<int>(rng() % 50);
        const int d = 1 + static_cast<int>(rng() % 5);
        Dataset ds = oracle::random_dataset(rng, n, d);
        std::vector<double> g(n);
        for (int i = 0; i < n; ++i) g[i] = oracle::uniform(rng, -1.0, 1.0);

        RegressionTree mine = gbfs::fit_tree(g, ds, FeatureState::uniform(d), 0.0, 3, 1);
        oracle::PlainTree ref = oracle::plain_fit_tree(g, ds, 3, 1);
        CHECK(oracle::trees_identical(ref, mine));
    }
}

TEST_CASE("min_leaf gates splitting") {
    Dataset ds = single_feature({0, 1, 2, 3});
    const std::vector<double> g = {1, 1, -1, -1};
    RegressionTree t = gbfs::fit_tree(g, ds, FeatureState::uniform(1), 0.0, 3, 3);
    CHECK(t.is_constant());  // 4 rows < 2*min_leaf = 6
    CHECK_THROWS_AS(gbfs::fit_tree(g, ds, FeatureState::uniform(1), 0.0, 0, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(gbfs::fit_tree(g, ds, FeatureState::uniform(1), 0.0, 2, 0),
                    std::invalid_argument);
}
