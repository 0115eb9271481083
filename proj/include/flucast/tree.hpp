#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "flucast/common.hpp"

namespace flucast {

// CART regression tree with squared-error splits. Nodes live in a flat
// arena; node 0 is the root, leaves have feature < 0.
struct TreeParams {
    int max_depth = 0;         // 0 = unlimited
    int min_leaf = 1;          // minimum samples in each child
    int feature_subsample = 0; // features tried per node; 0 = all
    std::uint64_t seed = 0;
};

class RegressionTree {
public:
    struct Node {
        int feature = -1;       // split feature, -1 for leaves
        double threshold = 0.0; // x[feature] <= threshold routes left
        int left = -1;
        int right = -1;
        double value = 0.0;     // mean of training targets reaching the node
        int n_samples = 0;
        double mse = 0.0;       // target variance at the node
    };

    std::vector<Node> nodes;
    int feature_count = 0;

    bool empty() const { return nodes.empty(); }

    double predict(std::span<const double> x) const {
        int at = 0;
        while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
            const Node& node = nodes[static_cast<std::size_t>(at)];
            at = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                             : node.right;
        }
        return nodes[static_cast<std::size_t>(at)].value;
    }
};

inline double tree_predict(const RegressionTree& tree, std::span<const double> x) {
    return tree.predict(x);
}

namespace detail {

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;  // decrease in total squared error
    std::size_t left_count = 0;
};

// Exhaustive scan over candidate features: sort the node's samples by each
// feature and evaluate every boundary between distinct values via prefix
// sums. Features ascend and thresholds ascend, and an equal-gain split never
// replaces an earlier one, so the result is unambiguous for a given subset.
inline SplitChoice best_split(const DataMatrix& X, std::span<const double> y,
                              std::span<const int> samples, std::span<const int> features,
                              int min_leaf, std::vector<int>& order_scratch) {
    SplitChoice best;
    const std::size_t n = samples.size();

    for (const int f : features) {
        order_scratch.assign(samples.begin(), samples.end());
        std::sort(order_scratch.begin(), order_scratch.end(), [&](int a, int b) {
            const double xa = X.at(static_cast<std::size_t>(a), static_cast<std::size_t>(f));
            const double xb = X.at(static_cast<std::size_t>(b), static_cast<std::size_t>(f));
            if (xa != xb) return xa < xb;
            return a < b;  // stable under duplicate values
        });

        double left_sum = 0.0, left_sq = 0.0;
        double right_sum = 0.0, right_sq = 0.0;
        for (const int s : order_scratch) {
            const double t = y[static_cast<std::size_t>(s)];
            right_sum += t;
            right_sq += t * t;
        }
        const double total_sse = std::max(0.0, right_sq - right_sum * right_sum /
                                                              static_cast<double>(n));

        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double t = y[static_cast<std::size_t>(order_scratch[i])];
            left_sum += t;
            left_sq += t * t;
            right_sum -= t;
            right_sq -= t * t;

            const double xv = X.at(static_cast<std::size_t>(order_scratch[i]),
                                   static_cast<std::size_t>(f));
            const double xn = X.at(static_cast<std::size_t>(order_scratch[i + 1]),
                                   static_cast<std::size_t>(f));
            if (xv == xn) continue;  // no boundary between equal values

            const std::size_t left_n = i + 1;
            const std::size_t right_n = n - left_n;
            if (left_n < static_cast<std::size_t>(min_leaf) ||
                right_n < static_cast<std::size_t>(min_leaf))
                continue;

            const double left_sse =
                std::max(0.0, left_sq - left_sum * left_sum / static_cast<double>(left_n));
            const double right_sse =
                std::max(0.0, right_sq - right_sum * right_sum / static_cast<double>(right_n));
            const double gain = total_sse - left_sse - right_sse;
            if (gain > best.gain + 1e-15) {
                best.feature = f;
                best.threshold = xv + (xn - xv) / 2.0;
                best.gain = gain;
                best.left_count = left_n;
            }
        }
    }
    return best;
}

}  // namespace detail

// Greedy top-down fit. Recursion is depth-first (left before right) with the
// node's feature subset drawn just before its split search, so the tree is a
// pure function of (X, y, params).
inline RegressionTree tree_fit(const DataMatrix& X, std::span<const double> y,
                               const TreeParams& params) {
    if (X.rows() == 0 || X.rows() != y.size())
        throw InvalidDataError("tree_fit: empty data or row/target mismatch");
    if (params.min_leaf < 1) throw InvalidConfigError("tree_fit: min_leaf must be >= 1");

    RegressionTree tree;
    tree.feature_count = static_cast<int>(X.cols());
    Rng rng(params.seed);

    std::vector<int> all_samples(X.rows());
    std::iota(all_samples.begin(), all_samples.end(), 0);

    const int p = static_cast<int>(X.cols());
    const int subsample = params.feature_subsample > 0 ? std::min(params.feature_subsample, p) : p;

    std::vector<int> order_scratch;

    struct Frame {
        std::vector<int> samples;
        int depth;
        int node_index;
    };

    const auto make_node = [&tree](std::span<const int> samples, std::span<const double> targets) {
        double sum = 0.0, sq = 0.0;
        for (const int s : samples) {
            const double t = targets[static_cast<std::size_t>(s)];
            sum += t;
            sq += t * t;
        }
        const double n = static_cast<double>(samples.size());
        RegressionTree::Node node;
        node.value = sum / n;
        node.n_samples = static_cast<int>(samples.size());
        node.mse = std::max(0.0, sq / n - node.value * node.value);
        tree.nodes.push_back(node);
        return static_cast<int>(tree.nodes.size()) - 1;
    };

    // Explicit stack; right child pushed first so expansion order matches the
    // recursive left-first formulation.
    const int root_index = make_node(all_samples, y);
    std::vector<Frame> stack;
    stack.push_back({std::move(all_samples), 0, root_index});

    while (!stack.empty()) {
        Frame frame = std::move(stack.back());
        stack.pop_back();

        const std::size_t n = frame.samples.size();
        const bool depth_capped = params.max_depth > 0 && frame.depth >= params.max_depth;
        if (depth_capped || n < 2 * static_cast<std::size_t>(params.min_leaf) ||
            tree.nodes[static_cast<std::size_t>(frame.node_index)].mse <= 0.0)
            continue;

        const std::vector<int> features =
            subsample < p ? sample_without_replacement(rng, p, subsample) : [p] {
                std::vector<int> fs(static_cast<std::size_t>(p));
                std::iota(fs.begin(), fs.end(), 0);
                return fs;
            }();

        const detail::SplitChoice split =
            detail::best_split(X, y, frame.samples, features, params.min_leaf, order_scratch);
        if (split.feature < 0 || split.gain <= 0.0) continue;

        std::vector<int> left_samples, right_samples;
        left_samples.reserve(split.left_count);
        right_samples.reserve(n - split.left_count);
        for (const int s : frame.samples) {
            if (X.at(static_cast<std::size_t>(s), static_cast<std::size_t>(split.feature)) <=
                split.threshold)
                left_samples.push_back(s);
            else
                right_samples.push_back(s);
        }

        const int left_index = make_node(left_samples, y);
        const int right_index = make_node(right_samples, y);
        auto& node = tree.nodes[static_cast<std::size_t>(frame.node_index)];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = left_index;
        node.right = right_index;

        stack.push_back({std::move(right_samples), frame.depth + 1, right_index});
        stack.push_back({std::move(left_samples), frame.depth + 1, left_index});
    }
    return tree;
}

// One row per internal node, for split-priority analysis across a model.
struct SplitStat {
    int tree_id = 0;
    int depth = 0;
    int feature_index = 0;
    double threshold = 0.0;
    int n_samples = 0;
    double variance_reduction = 0.0;  // per-sample decrease in MSE at the node
};

inline void collect_split_stats(const RegressionTree& tree, int tree_id,
                                std::vector<SplitStat>& out) {
    if (tree.empty()) return;
    struct Item {
        int node;
        int depth;
    };
    std::vector<Item> stack{{0, 0}};
    while (!stack.empty()) {
        const Item item = stack.back();
        stack.pop_back();
        const auto& node = tree.nodes[static_cast<std::size_t>(item.node)];
        if (node.feature < 0) continue;
        const auto& left = tree.nodes[static_cast<std::size_t>(node.left)];
        const auto& right = tree.nodes[static_cast<std::size_t>(node.right)];
        const double n = static_cast<double>(node.n_samples);
        const double child_mse = (static_cast<double>(left.n_samples) * left.mse +
                                  static_cast<double>(right.n_samples) * right.mse) /
                                 n;
        out.push_back({tree_id, item.depth, node.feature, node.threshold, node.n_samples,
                       node.mse - child_mse});
        stack.push_back({node.right, item.depth + 1});
        stack.push_back({node.left, item.depth + 1});
    }
}

}  // namespace flucast
