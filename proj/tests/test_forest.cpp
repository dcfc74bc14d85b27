#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "suptask/errors.hpp"
#include "suptask/forest.hpp"
#include "suptask/rng.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace suptask;
using testsupport::rect_ring;

namespace {

const char* kModelHeader =
    "forest v1\nn_trees 1\nseed 0\n"
    "feature_order area_m2 perimeter_m convexity elongation rectangularity "
    "compactness\n";

// Exhaustive enumeration of every candidate threshold; independent of the
// library's scan.
std::optional<SplitChoice> oracle_best_split(
    const std::vector<FeatureArray>& features,
    const std::vector<SizeClass>& labels,
    const std::vector<std::size_t>& idx, const std::vector<int>& feats,
    int min_leaf) {
    auto gini_of = [](const std::vector<SizeClass>& subset) {
        double counts[3] = {0, 0, 0};
        for (SizeClass c : subset) counts[static_cast<int>(c)] += 1.0;
        const double n = subset.size();
        if (n == 0) return 0.0;
        double s = 0.0;
        for (double c : counts) s += (c / n) * (c / n);
        return 1.0 - s;
    };
    std::vector<SizeClass> all;
    for (std::size_t i : idx) all.push_back(labels[i]);
    const double parent = gini_of(all);

    std::optional<SplitChoice> best;
    double best_w = parent - 1e-12;
    std::vector<int> sorted_feats = feats;
    std::sort(sorted_feats.begin(), sorted_feats.end());
    for (int f : sorted_feats) {
        std::vector<double> vals;
        for (std::size_t i : idx) vals.push_back(features[i][f]);
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        for (std::size_t v = 0; v + 1 < vals.size(); ++v) {
            const double thr = vals[v] + 0.5 * (vals[v + 1] - vals[v]);
            std::vector<SizeClass> left, right;
            for (std::size_t i : idx) {
                (features[i][f] < thr ? left : right).push_back(labels[i]);
            }
            if (left.size() < static_cast<std::size_t>(min_leaf) ||
                right.size() < static_cast<std::size_t>(min_leaf)) {
                continue;
            }
            const double w = (left.size() * gini_of(left) +
                              right.size() * gini_of(right)) /
                             idx.size();
            if (w < best_w) {
                best_w = w;
                best = SplitChoice{f, thr};
            }
        }
    }
    return best;
}

}  // namespace

TEST_CASE("gini impurity closed forms") {
    CHECK(gini_impurity({10, 0, 0}) == 0.0);
    CHECK(gini_impurity({5, 5, 0}) == 0.5);
    CHECK(gini_impurity({1, 1, 2}) == 0.625);
    CHECK(gini_impurity({0, 0, 0}) == 0.0);
    CHECK(gini_impurity({7, 7, 7}) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("best_split separates 1-d clusters at the midpoint") {
    std::vector<FeatureArray> features;
    for (double x : {1.0, 2.0, 10.0, 11.0}) {
        features.push_back(FeatureArray{x, 0, 0, 0, 0, 0});
    }
    const std::vector<SizeClass> labels = {
        SizeClass::DetachedSingle, SizeClass::DetachedSingle,
        SizeClass::RowHouse, SizeClass::RowHouse};
    const std::vector<std::size_t> idx = {0, 1, 2, 3};
    const std::vector<int> feats = {0};
    const auto choice = best_split(features, labels, idx, feats, 1);
    REQUIRE(choice.has_value());
    CHECK(choice->feature_index == 0);
    CHECK(choice->threshold == 6.0);
}

TEST_CASE("best_split returns NoSplit on pure or unseparable nodes") {
    std::vector<FeatureArray> features = {{1, 0, 0, 0, 0, 0},
                                          {2, 0, 0, 0, 0, 0}};
    std::vector<SizeClass> labels = {SizeClass::RowHouse, SizeClass::RowHouse};
    CHECK_FALSE(best_split(features, labels, std::vector<std::size_t>{0, 1},
                           std::vector<int>{0}, 1)
                    .has_value());

    // Identical feature vectors with different labels.
    features = {{3, 3, 3, 3, 3, 3}, {3, 3, 3, 3, 3, 3}};
    labels = {SizeClass::RowHouse, SizeClass::PerimeterBlock};
    CHECK_FALSE(best_split(features, labels, std::vector<std::size_t>{0, 1},
                           std::vector<int>{0, 1, 2, 3, 4, 5}, 1)
                    .has_value());
}

TEST_CASE("best_split matches exhaustive enumeration") {
    SplitMix64 rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<FeatureArray> features;
        std::vector<SizeClass> labels;
        const int n = 4 + static_cast<int>(rng.next_below(24));
        for (int i = 0; i < n; ++i) {
            FeatureArray f{};
            for (int k = 0; k < 6; ++k) {
                f[k] = std::floor(rng.next_double() * 8.0);  // ties likely
            }
            features.push_back(f);
            labels.push_back(static_cast<SizeClass>(rng.next_below(3)));
        }
        std::vector<std::size_t> idx(features.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::vector<int> feats;
        for (int k = 0; k < 6; ++k) {
            if (rng.next_double() < 0.6) feats.push_back(k);
        }
        if (feats.empty()) feats.push_back(0);
        const int min_leaf = 1 + static_cast<int>(rng.next_below(3));

        const auto got = best_split(features, labels, idx, feats, min_leaf);
        const auto want =
            oracle_best_split(features, labels, idx, feats, min_leaf);
        REQUIRE(got.has_value() == want.has_value());
        if (got) {
            CHECK(got->feature_index == want->feature_index);
            CHECK(got->threshold == want->threshold);
        }
    }
}

TEST_CASE("training on one class yields a constant classifier") {
    std::vector<FeatureArray> features;
    std::vector<SizeClass> labels;
    SplitMix64 rng(5);
    for (int i = 0; i < 20; ++i) {
        FeatureArray f{};
        for (int k = 0; k < 6; ++k) f[k] = rng.next_double();
        features.push_back(f);
        labels.push_back(SizeClass::RowHouse);
    }
    TrainParams params;
    params.n_trees = 10;
    params.seed = 3;
    const ForestModel model = train_forest(features, labels, params);
    for (int i = 0; i < 10; ++i) {
        FeatureArray f{};
        for (int k = 0; k < 6; ++k) f[k] = 10.0 * rng.next_double();
        CHECK(predict(model, f) == SizeClass::RowHouse);
    }
}

TEST_CASE("separable clusters train to high out-of-bag accuracy") {
    std::vector<FeatureArray> features;
    std::vector<SizeClass> labels;
    SplitMix64 gen(42);
    testsupport::gaussian_clusters(gen, 100, features, labels);
    TrainParams params;
    params.seed = 42;
    const ForestModel model = train_forest(features, labels, params);
    CHECK(model.oob_accuracy >= 0.95);

    // Re-derive the out-of-bag evaluation from the documented seeded
    // bagging: tree t draws n samples with SplitMix64(seed + t).
    const std::size_t n = features.size();
    std::size_t voted = 0, correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        int votes[3] = {0, 0, 0};
        bool any = false;
        for (std::size_t t = 0; t < model.trees.size(); ++t) {
            SplitMix64 bag(params.seed + t);
            bool in_bag = false;
            for (std::size_t d = 0; d < n; ++d) {
                if (bag.next_below(n) == i) in_bag = true;
            }
            if (in_bag) continue;
            ++votes[static_cast<int>(model.trees[t].predict(features[i]))];
            any = true;
        }
        if (!any) continue;
        ++voted;
        int best = 0;
        for (int c = 1; c < 3; ++c) {
            if (votes[c] > votes[best]) best = c;
        }
        if (static_cast<SizeClass>(best) == labels[i]) ++correct;
    }
    REQUIRE(voted > 0);
    CHECK(model.oob_accuracy ==
          static_cast<double>(correct) / static_cast<double>(voted));
}

TEST_CASE("training is deterministic and thread-count independent") {
    std::vector<FeatureArray> features;
    std::vector<SizeClass> labels;
    SplitMix64 gen(17);
    testsupport::gaussian_clusters(gen, 40, features, labels);
    TrainParams params;
    params.n_trees = 30;
    params.seed = 7;
    const std::string once = save_forest(train_forest(features, labels, params));
    const std::string twice = save_forest(train_forest(features, labels, params));
    CHECK(once == twice);
    params.n_threads = 4;
    const std::string parallel =
        save_forest(train_forest(features, labels, params));
    CHECK(parallel == once);
}

TEST_CASE("monotone feature transforms preserve tree partitions") {
    std::vector<FeatureArray> features;
    std::vector<SizeClass> labels;
    SplitMix64 gen(99);
    testsupport::gaussian_clusters(gen, 30, features, labels);

    std::vector<FeatureArray> transformed = features;
    for (FeatureArray& f : transformed) {
        f[2] = f[2] * f[2] * f[2];          // strictly increasing on (0, 1]
        f[0] = std::log(f[0]);              // strictly increasing on (0, inf)
    }
    TrainParams params;
    params.n_trees = 20;
    params.seed = 2;
    const ForestModel a = train_forest(features, labels, params);
    const ForestModel b = train_forest(transformed, labels, params);
    REQUIRE(a.trees.size() == b.trees.size());
    for (std::size_t t = 0; t < a.trees.size(); ++t) {
        for (std::size_t i = 0; i < features.size(); ++i) {
            CHECK(a.trees[t].leaf_index(features[i]) ==
                  b.trees[t].leaf_index(transformed[i]));
        }
    }
}

TEST_CASE("predict walks hand-written trees") {
    const std::string text = std::string(kModelHeader) +
                             "tree 0\nN 3 2.5\nL 10 0 0\nL 0 10 0\n";
    const ForestModel model = load_forest(text);
    CHECK(predict(model, FeatureArray{0, 0, 0, 4.0, 0, 0}) ==
          SizeClass::RowHouse);
    CHECK(predict(model, FeatureArray{0, 0, 0, 1.0, 0, 0}) ==
          SizeClass::DetachedSingle);
}

TEST_CASE("vote ties break toward the lowest class index") {
    const std::string text =
        "forest v1\nn_trees 2\nseed 0\n"
        "feature_order area_m2 perimeter_m convexity elongation "
        "rectangularity compactness\n"
        "tree 0\nL 1 0 0\n"
        "tree 1\nL 0 1 0\n";
    const ForestModel model = load_forest(text);
    CHECK(predict(model, FeatureArray{}) == SizeClass::DetachedSingle);
}

TEST_CASE("single-tree forests equal their tree") {
    std::vector<FeatureArray> features;
    std::vector<SizeClass> labels;
    SplitMix64 gen(3);
    testsupport::gaussian_clusters(gen, 20, features, labels);
    TrainParams params;
    params.n_trees = 1;
    params.seed = 11;
    const ForestModel model = train_forest(features, labels, params);
    for (const FeatureArray& f : features) {
        CHECK(predict(model, f) == model.trees[0].predict(f));
    }
}

TEST_CASE("model files round-trip bit-exactly") {
    std::vector<FeatureArray> features;
    std::vector<SizeClass> labels;
    SplitMix64 gen(123);
    testsupport::gaussian_clusters(gen, 50, features, labels);
    TrainParams params;
    params.n_trees = 25;
    params.seed = 9;
    const ForestModel model = train_forest(features, labels, params);
    const std::string text = save_forest(model);
    const ForestModel loaded = load_forest(text);
    CHECK(save_forest(loaded) == text);
    for (int i = 0; i < 200; ++i) {
        FeatureArray f{};
        for (int k = 0; k < 6; ++k) f[k] = 2000.0 * gen.next_double();
        CHECK(predict(model, f) == predict(loaded, f));
    }
}

TEST_CASE("malformed model files are rejected") {
    CHECK_THROWS_AS(load_forest(""), ModelFormatError);
    CHECK_THROWS_AS(load_forest("forest v2\n"), ModelFormatError);
    CHECK_THROWS_AS(load_forest(std::string(kModelHeader) + "tree 0\nX\n"),
                    ModelFormatError);
    CHECK_THROWS_AS(load_forest(std::string(kModelHeader) + "tree 0\nN 9 1.0\n"),
                    ModelFormatError);
    // Truncated tree.
    CHECK_THROWS_AS(load_forest(std::string(kModelHeader) + "tree 0\nN 0 1.0\nL 1 0 0\n"),
                    ModelFormatError);
    // Wrong feature order.
    CHECK_THROWS_AS(
        load_forest("forest v1\nn_trees 1\nseed 0\nfeature_order a b c d e f\n"
                    "tree 0\nL 1 0 0\n"),
        ModelFormatError);
}

TEST_CASE("training validates its inputs") {
    std::vector<FeatureArray> one = {{1, 1, 1, 1, 1, 1}};
    std::vector<SizeClass> one_label = {SizeClass::RowHouse};
    CHECK_THROWS_AS(train_forest(one, one_label, TrainParams{}),
                    InsufficientData);
    std::vector<FeatureArray> two = {{1, 1, 1, 1, 1, 1}, {2, 2, 2, 2, 2, 2}};
    CHECK_THROWS_AS(train_forest(two, one_label, TrainParams{}), InvalidParams);
    TrainParams bad;
    bad.feature_subsample = 7;
    std::vector<SizeClass> two_labels = {SizeClass::RowHouse,
                                         SizeClass::RowHouse};
    CHECK_THROWS_AS(train_forest(two, two_labels, bad), InvalidParams);
}

TEST_CASE("classify_hybrid precedence") {
    std::vector<Footprint> fps;
    for (std::uint64_t id : {3ull, 7ull, 12ull}) {
        fps.push_back(make_footprint(
            id, Polygon(rect_ring(10.0 * id, 0, 10.0 * id + 8, 8)),
            FootprintSource::Imported));
    }
    // A forest that always answers RowHouse.
    const ForestModel always_row = load_forest(
        std::string(kModelHeader) + "tree 0\nL 0 5 0\n");

    SUBCASE("full external labels leave the forest unconsulted") {
        std::map<std::uint64_t, SizeClass> external = {
            {3, SizeClass::PerimeterBlock},
            {7, SizeClass::DetachedSingle},
            {12, SizeClass::PerimeterBlock}};
        const HybridResult r = classify_hybrid(fps, always_row, external);
        CHECK(r.forest_predictions == 0);
        CHECK(r.labels.at(3) == SizeClass::PerimeterBlock);
        CHECK(r.labels.at(7) == SizeClass::DetachedSingle);
        CHECK(r.labels.at(12) == SizeClass::PerimeterBlock);
    }

    SUBCASE("empty external labels fall back to the forest") {
        const HybridResult r = classify_hybrid(fps, always_row, {});
        CHECK(r.forest_predictions == 3);
        for (const auto& [id, cls] : r.labels) {
            CHECK(cls == SizeClass::RowHouse);
        }
    }

    SUBCASE("external label wins over the forest for its id") {
        const HybridResult r = classify_hybrid(
            fps, always_row, {{7, SizeClass::PerimeterBlock}});
        CHECK(r.forest_predictions == 2);
        CHECK(r.labels.at(7) == SizeClass::PerimeterBlock);
        CHECK(r.labels.at(3) == SizeClass::RowHouse);
    }

    SUBCASE("unknown external ids are rejected") {
        CHECK_THROWS_AS(
            classify_hybrid(fps, always_row, {{99, SizeClass::RowHouse}}),
            UnknownFootprintId);
    }
}
