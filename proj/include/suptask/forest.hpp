#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "suptask/features.hpp"
#include "suptask/geometry.hpp"

namespace suptask {

// The three size classes that separate well on shape alone. Apartment
// blocks and high-rises are deliberately absent: they cannot be told apart
// without building heights.
enum class SizeClass : int {
    DetachedSingle = 0,
    RowHouse = 1,
    PerimeterBlock = 2,
};

inline constexpr int kSizeClassCount = 3;

std::string to_string(SizeClass c);
SizeClass size_class_from_string(const std::string& s);

using FeatureArray = std::array<double, kFeatureCount>;
using ClassCounts = std::array<std::uint32_t, kSizeClassCount>;

// 1 - sum(p_c^2); 0 for an empty histogram, at most 2/3 for three classes.
double gini_impurity(const ClassCounts& counts);

struct SplitChoice {
    int feature_index = 0;
    double threshold = 0.0;  // go left when feature < threshold
};

// Minimizes weighted child Gini over the candidate features and the
// midpoints between consecutive distinct sorted values. Ties break toward
// the lowest feature index, then the lowest threshold. Returns nullopt for
// a pure node, when no threshold separates the samples, or when no split
// reduces impurity.
std::optional<SplitChoice> best_split(
    std::span<const FeatureArray> features, std::span<const SizeClass> labels,
    std::span<const std::size_t> sample_indices,
    std::span<const int> candidate_features, int min_samples_leaf);

// Flat preorder node storage; leaves keep the class histogram of their
// training samples.
struct TreeNode {
    int feature_index = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    ClassCounts class_counts{};
};

class DecisionTree {
public:
    explicit DecisionTree(std::vector<TreeNode> nodes)
        : nodes_(std::move(nodes)) {}

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    std::size_t leaf_index(const FeatureArray& f) const;
    SizeClass predict(const FeatureArray& f) const;

private:
    std::vector<TreeNode> nodes_;
};

struct TrainParams {
    int n_trees = 100;
    int max_depth = 12;
    int min_samples_leaf = 2;
    int feature_subsample = 2;  // candidate features per split, ~sqrt(6)
    bool bootstrap = true;
    std::uint64_t seed = 0;
    int n_threads = 1;
};

struct ForestModel {
    std::vector<DecisionTree> trees;
    std::uint64_t seed = 0;
    std::vector<std::string> feature_order;
    // Out-of-bag estimate from training; NaN when unavailable. Not part of
    // the serialized model.
    double oob_accuracy = 0.0;
};

// Seeded bagging: tree i trains on a bootstrap resample drawn with the
// sub-seed (seed + i), with feature_subsample random split candidates.
// Identical inputs and seed give a bit-identical model, regardless of
// n_threads.
ForestModel train_forest(const std::vector<FeatureArray>& features,
                         const std::vector<SizeClass>& labels,
                         const TrainParams& params);

// Majority vote over trees; ties resolve to the lowest class index.
SizeClass predict(const ForestModel& model, const FeatureArray& f);
SizeClass predict(const ForestModel& model, const GeometryFeatures& f);

struct HybridResult {
    std::map<std::uint64_t, SizeClass> labels;
    // Number of forest predictions made; stays 0 when external labels
    // cover every footprint.
    std::size_t forest_predictions = 0;
};

// External labels win verbatim; the forest classifies the rest.
HybridResult classify_hybrid(
    const std::vector<Footprint>& footprints, const ForestModel& model,
    const std::map<std::uint64_t, SizeClass>& external);

// Line-oriented text model format, bit-exact round-trip (thresholds with
// 17 significant digits).
std::string save_forest(const ForestModel& model);
ForestModel load_forest(const std::string& text);

}  // namespace suptask
