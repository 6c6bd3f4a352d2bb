#pragma once

// Data-driven knot selection: a greedy least-squares regression tree over a
// 1D or 2D domain whose leaf-cell centers serve as knot candidates, and the
// Monte-Carlo noise curve used to decide how many leaves to keep.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "tensorfda/geometry.hpp"

namespace tensorfda {

struct TreeConfig {
    std::size_t max_leaves = 20;
    std::size_t min_cell_points = 5;
    /// Domain box; defaults to the bounding box of the sample locations.
    std::optional<Box> domain;
};

struct TreeNode {
    int axis = -1;  // -1 for a leaf
    double threshold = 0.0;
    std::size_t left = 0;
    std::size_t right = 0;
    Box cell;
    double mean = 0.0;
    double sse = 0.0;
    std::size_t count = 0;

    [[nodiscard]] bool is_leaf() const noexcept { return axis < 0; }
};

struct SplitRecord {
    std::size_t node = 0;  // node that was split
    int axis = 0;
    double threshold = 0.0;
    double sse_reduction = 0.0;
};

/// Fitted tree. Samples with x[axis] < threshold go to the left child.
class RegressionTree {
public:
    RegressionTree(Box domain, std::vector<TreeNode> nodes, std::vector<SplitRecord> splits,
                   std::vector<double> sse_history);

    [[nodiscard]] const Box& domain() const noexcept { return domain_; }
    [[nodiscard]] const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] const std::vector<SplitRecord>& splits() const noexcept { return splits_; }
    /// sse_history()[m - 1] is the total SSE of the fit with m leaves.
    [[nodiscard]] const std::vector<double>& sse_history() const noexcept { return sse_history_; }
    [[nodiscard]] std::size_t leaf_count() const noexcept { return sse_history_.size(); }
    /// Leaf node indices in depth-first, left-to-right order.
    [[nodiscard]] std::vector<std::size_t> leaves() const;

    /// Piecewise-constant prediction at x.
    [[nodiscard]] double predict(std::span<const double> x) const;
    /// Index of the leaf whose cell holds x.
    [[nodiscard]] std::size_t leaf_of(std::span<const double> x) const;

private:
    Box domain_;
    std::vector<TreeNode> nodes_;
    std::vector<SplitRecord> splits_;
    std::vector<double> sse_history_;
};

/// Greedy best-first CART on (locations, values). At each step the leaf,
/// axis and midpoint threshold with the largest SSE reduction is split;
/// ties go to the earlier leaf, then the lower axis, then the lower
/// threshold. Growth stops at max_leaves or when no split reduces the SSE.
/// Throws InputError for empty or inconsistent input.
RegressionTree fit_tree(const PointSet& locations, std::span<const double> values, const TreeConfig& config);

struct KnotCandidateSet {
    PointSet points;
    Box domain;

    friend bool operator==(const KnotCandidateSet&, const KnotCandidateSet&) = default;
};

/// One candidate per leaf: the center of its cell.
KnotCandidateSet extract_knots(const RegressionTree& tree);

struct StoppingCurve {
    std::vector<std::size_t> leaf_counts;
    std::vector<double> relative_errors;
    bool is_noise_reference = false;

    friend bool operator==(const StoppingCurve&, const StoppingCurve&) = default;
};

/// Relative SSE (SSE at m leaves / SSE at one leaf) for m = 1..max_leaves.
/// A tree that stopped early holds its last value.
StoppingCurve stopping_curve(const RegressionTree& tree, std::size_t max_leaves);

/// Average stopping curve of n_monte_carlo standard Gaussian signals on the
/// given locations, deterministic in the seed.
StoppingCurve noise_reference_curve(const PointSet& locations, std::size_t max_leaves, std::size_t n_monte_carlo,
                                    std::uint64_t seed, std::size_t min_cell_points = 5);

/// Same on n_samples equispaced points of [0, 1].
StoppingCurve noise_reference_curve(std::size_t n_samples, std::size_t max_leaves, std::size_t n_monte_carlo,
                                    std::uint64_t seed, std::size_t min_cell_points = 5);

/// Smallest m whose one-step drop of the data curve (m to m + 1) does not
/// exceed that of the noise curve; the last leaf count if there is none.
/// Throws InputError when the curves use different leaf-count grids.
std::size_t select_knot_count(const StoppingCurve& data_curve, const StoppingCurve& noise_curve);

}  // namespace tensorfda
