#include "suptask/forest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "suptask/errors.hpp"
#include "suptask/rng.hpp"

namespace suptask {

std::string to_string(SizeClass c) {
    switch (c) {
        case SizeClass::DetachedSingle: return "DetachedSingle";
        case SizeClass::RowHouse: return "RowHouse";
        case SizeClass::PerimeterBlock: return "PerimeterBlock";
    }
    throw Error("invalid size class value");
}

SizeClass size_class_from_string(const std::string& s) {
    if (s == "DetachedSingle") return SizeClass::DetachedSingle;
    if (s == "RowHouse") return SizeClass::RowHouse;
    if (s == "PerimeterBlock") return SizeClass::PerimeterBlock;
    throw Error("unknown size class '" + s + "'");
}

double gini_impurity(const ClassCounts& counts) {
    double total = 0.0;
    for (std::uint32_t c : counts) total += c;
    if (total == 0.0) return 0.0;
    double sum_sq = 0.0;
    for (std::uint32_t c : counts) {
        const double p = c / total;
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

std::optional<SplitChoice> best_split(
    std::span<const FeatureArray> features, std::span<const SizeClass> labels,
    std::span<const std::size_t> sample_indices,
    std::span<const int> candidate_features, int min_samples_leaf) {
    const std::size_t n = sample_indices.size();
    if (n < 2) return std::nullopt;

    ClassCounts parent_counts{};
    for (std::size_t idx : sample_indices) {
        ++parent_counts[static_cast<int>(labels[idx])];
    }
    const double parent_gini = gini_impurity(parent_counts);
    if (parent_gini == 0.0) return std::nullopt;  // pure node

    std::vector<int> feats(candidate_features.begin(), candidate_features.end());
    std::sort(feats.begin(), feats.end());
    feats.erase(std::unique(feats.begin(), feats.end()), feats.end());

    double best_weighted = std::numeric_limits<double>::infinity();
    std::optional<SplitChoice> best;
    std::vector<std::pair<double, SizeClass>> values(n);

    for (int feat : feats) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t idx = sample_indices[i];
            values[i] = {features[idx][feat], labels[idx]};
        }
        std::sort(values.begin(), values.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        ClassCounts left{};
        ClassCounts right = parent_counts;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            ++left[static_cast<int>(values[i].second)];
            --right[static_cast<int>(values[i].second)];
            if (values[i].first == values[i + 1].first) continue;
            const std::size_t nl = i + 1, nr = n - nl;
            if (nl < static_cast<std::size_t>(min_samples_leaf) ||
                nr < static_cast<std::size_t>(min_samples_leaf)) {
                continue;
            }
            const double weighted =
                (nl * gini_impurity(left) + nr * gini_impurity(right)) / n;
            if (weighted < best_weighted) {
                best_weighted = weighted;
                const double threshold =
                    values[i].first + 0.5 * (values[i + 1].first - values[i].first);
                best = SplitChoice{feat, threshold};
            }
        }
    }
    // Require an actual impurity reduction (the margin guards float noise).
    if (best && best_weighted >= parent_gini - 1e-12) return std::nullopt;
    return best;
}

std::size_t DecisionTree::leaf_index(const FeatureArray& f) const {
    std::size_t i = 0;
    while (nodes_[i].feature_index >= 0) {
        const TreeNode& nd = nodes_[i];
        i = (f[nd.feature_index] < nd.threshold)
                ? static_cast<std::size_t>(nd.left)
                : static_cast<std::size_t>(nd.right);
    }
    return i;
}

namespace {

SizeClass majority_class(const ClassCounts& counts) {
    int best = 0;
    for (int c = 1; c < kSizeClassCount; ++c) {
        if (counts[c] > counts[best]) best = c;  // ties keep the lowest index
    }
    return static_cast<SizeClass>(best);
}

}  // namespace

SizeClass DecisionTree::predict(const FeatureArray& f) const {
    return majority_class(nodes_[leaf_index(f)].class_counts);
}

namespace {

struct TreeBuilder {
    std::span<const FeatureArray> features;
    std::span<const SizeClass> labels;
    const TrainParams& params;
    SplitMix64& rng;
    std::vector<TreeNode> nodes;

    std::vector<int> draw_candidate_features() {
        std::array<int, kFeatureCount> pool;
        for (int i = 0; i < kFeatureCount; ++i) pool[i] = i;
        const int k = std::clamp(params.feature_subsample, 1, kFeatureCount);
        for (int i = 0; i < k; ++i) {
            const int j =
                i + static_cast<int>(rng.next_below(kFeatureCount - i));
            std::swap(pool[i], pool[j]);
        }
        std::vector<int> out(pool.begin(), pool.begin() + k);
        std::sort(out.begin(), out.end());
        return out;
    }

    std::int32_t build(std::vector<std::size_t>& samples, int depth) {
        ClassCounts counts{};
        for (std::size_t idx : samples) ++counts[static_cast<int>(labels[idx])];

        const std::int32_t me = static_cast<std::int32_t>(nodes.size());
        nodes.push_back(TreeNode{});
        nodes[me].class_counts = counts;

        if (depth >= params.max_depth ||
            samples.size() < 2 * static_cast<std::size_t>(params.min_samples_leaf)) {
            return me;
        }
        const auto candidates = draw_candidate_features();
        const auto choice = best_split(features, labels, samples, candidates,
                                       params.min_samples_leaf);
        if (!choice) return me;

        std::vector<std::size_t> left_samples, right_samples;
        left_samples.reserve(samples.size());
        right_samples.reserve(samples.size());
        for (std::size_t idx : samples) {
            if (features[idx][choice->feature_index] < choice->threshold) {
                left_samples.push_back(idx);
            } else {
                right_samples.push_back(idx);
            }
        }
        samples.clear();
        samples.shrink_to_fit();

        nodes[me].feature_index = choice->feature_index;
        nodes[me].threshold = choice->threshold;
        const std::int32_t l = build(left_samples, depth + 1);
        nodes[me].left = l;
        const std::int32_t r = build(right_samples, depth + 1);
        nodes[me].right = r;
        return me;
    }
};

DecisionTree train_tree(std::span<const FeatureArray> features,
                        std::span<const SizeClass> labels,
                        const TrainParams& params, std::uint64_t sub_seed,
                        std::vector<bool>& in_bag) {
    SplitMix64 rng(sub_seed);
    const std::size_t n = features.size();
    std::vector<std::size_t> samples;
    samples.reserve(n);
    in_bag.assign(n, false);
    if (params.bootstrap) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t idx = rng.next_below(n);
            samples.push_back(idx);
            in_bag[idx] = true;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) samples.push_back(i);
        in_bag.assign(n, true);
    }
    TreeBuilder builder{features, labels, params, rng, {}};
    builder.build(samples, 0);
    return DecisionTree(std::move(builder.nodes));
}

}  // namespace

ForestModel train_forest(const std::vector<FeatureArray>& features,
                         const std::vector<SizeClass>& labels,
                         const TrainParams& params) {
    if (features.size() != labels.size()) {
        throw InvalidParams("features and labels differ in length");
    }
    if (features.size() < 2) {
        throw InsufficientData("need at least 2 training samples, got " +
                               std::to_string(features.size()));
    }
    if (params.n_trees < 1) {
        throw InvalidParams("n_trees must be >= 1");
    }
    if (params.feature_subsample < 1 ||
        params.feature_subsample > kFeatureCount) {
        throw InvalidParams("feature_subsample must be in [1, 6]");
    }
    if (params.max_depth < 1 || params.min_samples_leaf < 1) {
        throw InvalidParams("max_depth and min_samples_leaf must be >= 1");
    }

    const std::size_t n = features.size();
    const int n_trees = params.n_trees;
    std::vector<DecisionTree> trees(static_cast<std::size_t>(n_trees),
                                    DecisionTree({TreeNode{}}));
    std::vector<std::vector<bool>> in_bag(n_trees);

    // Per-tree sub-seeds make parallel training bit-identical to serial.
    auto run = [&](int first, int last) {
        for (int t = first; t < last; ++t) {
            trees[t] = train_tree(features, labels, params,
                                  params.seed + static_cast<std::uint64_t>(t),
                                  in_bag[t]);
        }
    };
    const int n_threads = std::max(1, params.n_threads);
    if (n_threads == 1 || n_trees < 2) {
        run(0, n_trees);
    } else {
        std::vector<std::thread> workers;
        const int chunk = (n_trees + n_threads - 1) / n_threads;
        for (int t = 0; t < n_trees; t += chunk) {
            workers.emplace_back(run, t, std::min(t + chunk, n_trees));
        }
        for (auto& w : workers) w.join();
    }

    ForestModel model;
    model.trees = std::move(trees);
    model.seed = params.seed;
    model.feature_order.assign(feature_names().begin(), feature_names().end());

    // Out-of-bag accuracy: vote with the trees that did not see the sample.
    std::size_t voted = 0, correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ClassCounts votes{};
        bool any = false;
        for (int t = 0; t < n_trees; ++t) {
            if (in_bag[t][i]) continue;
            ++votes[static_cast<int>(model.trees[t].predict(features[i]))];
            any = true;
        }
        if (!any) continue;
        ++voted;
        if (majority_class(votes) == labels[i]) ++correct;
    }
    model.oob_accuracy =
        voted ? static_cast<double>(correct) / static_cast<double>(voted)
              : std::numeric_limits<double>::quiet_NaN();
    return model;
}

SizeClass predict(const ForestModel& model, const FeatureArray& f) {
    if (model.trees.empty()) {
        throw InvalidParams("model has no trees");
    }
    ClassCounts votes{};
    for (const DecisionTree& tree : model.trees) {
        ++votes[static_cast<int>(tree.predict(f))];
    }
    return majority_class(votes);
}

SizeClass predict(const ForestModel& model, const GeometryFeatures& f) {
    return predict(model, f.to_array());
}

HybridResult classify_hybrid(
    const std::vector<Footprint>& footprints, const ForestModel& model,
    const std::map<std::uint64_t, SizeClass>& external) {
    std::set<std::uint64_t> known_ids;
    for (const Footprint& fp : footprints) known_ids.insert(fp.id);
    for (const auto& [id, cls] : external) {
        (void)cls;
        if (!known_ids.count(id)) throw UnknownFootprintId(id);
    }
    HybridResult result;
    for (const Footprint& fp : footprints) {
        const auto it = external.find(fp.id);
        if (it != external.end()) {
            result.labels.emplace(fp.id, it->second);
        } else {
            result.labels.emplace(
                fp.id, predict(model, extract_features(fp).to_array()));
            ++result.forest_predictions;
        }
    }
    return result;
}

namespace {

void append_node(std::string& out, const std::vector<TreeNode>& nodes,
                 std::int32_t i) {
    char buf[64];
    const TreeNode& nd = nodes[i];
    if (nd.feature_index < 0) {
        std::snprintf(buf, sizeof buf, "L %u %u %u\n", nd.class_counts[0],
                      nd.class_counts[1], nd.class_counts[2]);
        out += buf;
        return;
    }
    std::snprintf(buf, sizeof buf, "N %d %.17g\n", nd.feature_index,
                  nd.threshold);
    out += buf;
    append_node(out, nodes, nd.left);
    append_node(out, nodes, nd.right);
}

}  // namespace

std::string save_forest(const ForestModel& model) {
    std::string out = "forest v1\n";
    out += "n_trees " + std::to_string(model.trees.size()) + "\n";
    out += "seed " + std::to_string(model.seed) + "\n";
    out += "feature_order";
    for (const std::string& name : model.feature_order) {
        out += ' ';
        out += name;
    }
    out += '\n';
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        out += "tree " + std::to_string(t) + "\n";
        append_node(out, model.trees[t].nodes(), 0);
    }
    return out;
}

namespace {

struct LineReader {
    std::istringstream in;
    std::size_t line_no = 0;
    explicit LineReader(const std::string& text) : in(text) {}

    std::optional<std::string> next() {
        std::string ln;
        if (!std::getline(in, ln)) return std::nullopt;
        ++line_no;
        if (!ln.empty() && ln.back() == '\r') ln.pop_back();
        return ln;
    }
    [[noreturn]] void fail(const std::string& msg) const {
        throw ModelFormatError(msg + " (line " + std::to_string(line_no) + ")");
    }
};

std::int32_t read_node(LineReader& reader, std::vector<TreeNode>& nodes,
                       int depth) {
    if (depth > 1024) reader.fail("tree nesting too deep");
    const auto ln = reader.next();
    if (!ln) reader.fail("unexpected end of model file");
    std::istringstream ls(*ln);
    std::string tag;
    ls >> tag;
    const std::int32_t me = static_cast<std::int32_t>(nodes.size());
    nodes.push_back(TreeNode{});
    if (tag == "L") {
        long long c0 = -1, c1 = -1, c2 = -1;
        ls >> c0 >> c1 >> c2;
        if (!ls || c0 < 0 || c1 < 0 || c2 < 0 || c0 + c1 + c2 == 0) {
            reader.fail("malformed leaf");
        }
        nodes[me].class_counts = {static_cast<std::uint32_t>(c0),
                                  static_cast<std::uint32_t>(c1),
                                  static_cast<std::uint32_t>(c2)};
        return me;
    }
    if (tag == "N") {
        int feat = -1;
        double threshold = 0.0;
        ls >> feat >> threshold;
        if (!ls || feat < 0 || feat >= kFeatureCount ||
            !std::isfinite(threshold)) {
            reader.fail("malformed internal node");
        }
        nodes[me].feature_index = feat;
        nodes[me].threshold = threshold;
        nodes[me].left = read_node(reader, nodes, depth + 1);
        nodes[me].right = read_node(reader, nodes, depth + 1);
        return me;
    }
    reader.fail("expected node line 'N ...' or 'L ...'");
}

}  // namespace

ForestModel load_forest(const std::string& text) {
    LineReader reader(text);
    auto expect_line = [&](const std::string& what) {
        const auto ln = reader.next();
        if (!ln) reader.fail("missing " + what);
        return *ln;
    };
    if (expect_line("format header") != "forest v1") {
        reader.fail("not a 'forest v1' model file");
    }
    auto parse_kv = [&](const std::string& key) {
        const std::string ln = expect_line(key);
        if (ln.rfind(key + " ", 0) != 0) reader.fail("expected '" + key + "'");
        return ln.substr(key.size() + 1);
    };
    const std::string n_trees_str = parse_kv("n_trees");
    const std::string seed_str = parse_kv("seed");
    const std::string order_line = expect_line("feature_order");
    if (order_line.rfind("feature_order ", 0) != 0) {
        reader.fail("expected 'feature_order'");
    }

    ForestModel model;
    {
        std::istringstream os(order_line.substr(std::string("feature_order ").size()));
        std::string name;
        while (os >> name) model.feature_order.push_back(name);
        const auto& canonical = feature_names();
        if (model.feature_order.size() != canonical.size() ||
            !std::equal(canonical.begin(), canonical.end(),
                        model.feature_order.begin())) {
            reader.fail("feature_order does not match this build");
        }
    }
    long long n_trees = 0;
    {
        auto [p, ec] = std::from_chars(n_trees_str.data(),
                                       n_trees_str.data() + n_trees_str.size(),
                                       n_trees);
        if (ec != std::errc() || p != n_trees_str.data() + n_trees_str.size() ||
            n_trees < 1 || n_trees > 1'000'000) {
            reader.fail("invalid n_trees");
        }
    }
    {
        std::uint64_t seed = 0;
        auto [p, ec] = std::from_chars(seed_str.data(),
                                       seed_str.data() + seed_str.size(), seed);
        if (ec != std::errc() || p != seed_str.data() + seed_str.size()) {
            reader.fail("invalid seed");
        }
        model.seed = seed;
    }
    model.trees.reserve(static_cast<std::size_t>(n_trees));
    for (long long t = 0; t < n_trees; ++t) {
        const std::string tree_line = expect_line("tree header");
        if (tree_line != "tree " + std::to_string(t)) {
            reader.fail("expected 'tree " + std::to_string(t) + "'");
        }
        std::vector<TreeNode> nodes;
        read_node(reader, nodes, 0);
        model.trees.push_back(DecisionTree(std::move(nodes)));
    }
    if (reader.next()) {
        reader.fail("trailing content after last tree");
    }
    model.oob_accuracy = std::numeric_limits<double>::quiet_NaN();
    return model;
}

}  // namespace suptask
