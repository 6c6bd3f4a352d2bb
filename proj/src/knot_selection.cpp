#include "tensorfda/knot_selection.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

#include "tensorfda/errors.hpp"

namespace tensorfda {
namespace {

// A split must remove at least this fraction of the root SSE; below it the
// reduction is indistinguishable from round-off.
constexpr double kMinRelativeReduction = 1e-13;
// Root SSE below this fraction of sum(y^2) means the signal is constant.
constexpr double kConstantSignal = 1e-24;

struct Candidate {
    bool valid = false;
    int axis = 0;
    double threshold = 0.0;
    double reduction = 0.0;
};

struct Leaf {
    std::size_t node = 0;
    std::vector<std::size_t> members;
    Candidate best;
};

struct Moments {
    double mean = 0.0;
    double sse = 0.0;
};

Moments moments_of(std::span<const double> values, const std::vector<std::size_t>& members) {
    Moments m;
    if (members.empty()) return m;
    for (std::size_t i : members) m.mean += values[i];
    m.mean /= static_cast<double>(members.size());
    for (std::size_t i : members) {
        const double r = values[i] - m.mean;
        m.sse += r * r;
    }
    return m;
}

Candidate best_split(const PointSet& x, std::span<const double> values, const std::vector<std::size_t>& members,
                     double mean, std::size_t min_cell) {
    Candidate best;
    const std::size_t n = members.size();
    if (n < 2 * min_cell) return best;
    std::vector<std::size_t> order(members);
    const std::size_t d = x.dims;
    for (std::size_t axis = 0; axis < d; ++axis) {
        std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
            return x.coords[l * d + axis] < x.coords[r * d + axis];
        });
        double left_sum = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            left_sum += values[order[p]] - mean;
            const std::size_t nl = p + 1;
            const std::size_t nr = n - nl;
            if (nl < min_cell) continue;
            if (nr < min_cell) break;
            const double lo = x.coords[order[p] * d + axis];
            const double hi = x.coords[order[p + 1] * d + axis];
            if (!(lo < hi)) continue;
            const double reduction =
                left_sum * left_sum * static_cast<double>(n) / (static_cast<double>(nl) * static_cast<double>(nr));
            if (!best.valid || reduction > best.reduction) {
                double t = 0.5 * (lo + hi);
                if (!(lo < t && t < hi)) t = hi;
                best = Candidate{true, static_cast<int>(axis), t, reduction};
            }
        }
    }
    return best;
}

}  // namespace

RegressionTree::RegressionTree(Box domain, std::vector<TreeNode> nodes, std::vector<SplitRecord> splits,
                               std::vector<double> sse_history)
    : domain_(std::move(domain)), nodes_(std::move(nodes)), splits_(std::move(splits)),
      sse_history_(std::move(sse_history)) {}

std::vector<std::size_t> RegressionTree::leaves() const {
    std::vector<std::size_t> out;
    std::vector<std::size_t> stack{0};
    while (!stack.empty()) {
        const std::size_t i = stack.back();
        stack.pop_back();
        if (nodes_[i].is_leaf()) {
            out.push_back(i);
        } else {
            stack.push_back(nodes_[i].right);
            stack.push_back(nodes_[i].left);
        }
    }
    return out;
}

std::size_t RegressionTree::leaf_of(std::span<const double> x) const {
    if (x.size() != domain_.dims()) throw DomainError("RegressionTree: point has wrong dimension");
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
        const TreeNode& n = nodes_[i];
        i = x[static_cast<std::size_t>(n.axis)] < n.threshold ? n.left : n.right;
    }
    return i;
}

double RegressionTree::predict(std::span<const double> x) const { return nodes_[leaf_of(x)].mean; }

RegressionTree fit_tree(const PointSet& locations, std::span<const double> values, const TreeConfig& config) {
    const std::size_t n = locations.size();
    if (n == 0) throw InputError("fit_tree: no samples");
    if (locations.dims < 1 || locations.dims > 2) throw InputError("fit_tree: only 1D and 2D domains are supported");
    if (values.size() != n) throw InputError("fit_tree: location and value counts differ");
    if (config.max_leaves < 1) throw ConfigError("fit_tree: max_leaves must be at least 1");
    if (config.min_cell_points < 1) throw ConfigError("fit_tree: min_cell_points must be at least 1");
    Box domain = config.domain ? *config.domain : locations.bounds();
    if (domain.dims() != locations.dims) throw InputError("fit_tree: domain dimension mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        if (!domain.contains(locations.point(i), 1e-12)) {
            throw DomainError("fit_tree: sample " + std::to_string(i) + " lies outside the domain");
        }
    }

    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    const Moments root = moments_of(values, all);
    double total_sq = 0.0;
    for (double v : values) total_sq += v * v;
    const bool constant = !(root.sse > kConstantSignal * total_sq);
    const double min_reduction = kMinRelativeReduction * root.sse;

    std::vector<TreeNode> nodes;
    nodes.push_back(TreeNode{-1, 0.0, 0, 0, domain, root.mean, root.sse, n});
    std::vector<Leaf> leaves;
    leaves.push_back(Leaf{0, all, constant ? Candidate{} : best_split(locations, values, all, root.mean,
                                                                       config.min_cell_points)});
    std::vector<SplitRecord> splits;
    std::vector<double> history{root.sse};

    while (leaves.size() < config.max_leaves) {
        std::size_t pick = leaves.size();
        for (std::size_t l = 0; l < leaves.size(); ++l) {
            const Candidate& c = leaves[l].best;
            if (!c.valid || !(c.reduction > min_reduction)) continue;
            if (pick == leaves.size() || c.reduction > leaves[pick].best.reduction ||
                (c.reduction == leaves[pick].best.reduction && leaves[l].node < leaves[pick].node)) {
                pick = l;
            }
        }
        if (pick == leaves.size()) break;

        Leaf parent = std::move(leaves[pick]);
        leaves.erase(leaves.begin() + static_cast<std::ptrdiff_t>(pick));
        const auto axis = static_cast<std::size_t>(parent.best.axis);
        const double t = parent.best.threshold;
        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        for (std::size_t i : parent.members) {
            (locations.coords[i * locations.dims + axis] < t ? left : right).push_back(i);
        }
        const Moments ml = moments_of(values, left);
        const Moments mr = moments_of(values, right);
        Box lcell = nodes[parent.node].cell;
        Box rcell = lcell;
        lcell.hi[axis] = t;
        rcell.lo[axis] = t;
        const std::size_t li = nodes.size();
        nodes.push_back(TreeNode{-1, 0.0, 0, 0, lcell, ml.mean, ml.sse, left.size()});
        nodes.push_back(TreeNode{-1, 0.0, 0, 0, rcell, mr.mean, mr.sse, right.size()});
        TreeNode& pn = nodes[parent.node];
        pn.axis = parent.best.axis;
        pn.threshold = t;
        pn.left = li;
        pn.right = li + 1;
        splits.push_back(SplitRecord{parent.node, parent.best.axis, t, parent.best.reduction});

        leaves.push_back(Leaf{li, left, best_split(locations, values, left, ml.mean, config.min_cell_points)});
        leaves.push_back(Leaf{li + 1, right, best_split(locations, values, right, mr.mean, config.min_cell_points)});
        double sse = 0.0;
        for (const Leaf& l : leaves) sse += nodes[l.node].sse;
        history.push_back(sse);
    }
    return RegressionTree(std::move(domain), std::move(nodes), std::move(splits), std::move(history));
}

KnotCandidateSet extract_knots(const RegressionTree& tree) {
    KnotCandidateSet out;
    out.domain = tree.domain();
    out.points.dims = tree.domain().dims();
    for (std::size_t leaf : tree.leaves()) out.points.push(tree.nodes()[leaf].cell.center());
    return out;
}

StoppingCurve stopping_curve(const RegressionTree& tree, std::size_t max_leaves) {
    StoppingCurve curve;
    const auto& h = tree.sse_history();
    const double root = h.front();
    for (std::size_t m = 1; m <= max_leaves; ++m) {
        curve.leaf_counts.push_back(m);
        const double sse = h[std::min(m, h.size()) - 1];
        curve.relative_errors.push_back(root > 0.0 ? sse / root : 1.0);
    }
    return curve;
}

StoppingCurve noise_reference_curve(const PointSet& locations, std::size_t max_leaves, std::size_t n_monte_carlo,
                                    std::uint64_t seed, std::size_t min_cell_points) {
    if (n_monte_carlo < 1) throw ConfigError("noise_reference_curve: need at least one Monte-Carlo replicate");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    TreeConfig config{max_leaves, min_cell_points, std::nullopt};
    std::vector<double> sum(max_leaves, 0.0);
    std::vector<double> y(locations.size());
    for (std::size_t trial = 0; trial < n_monte_carlo; ++trial) {
        for (double& v : y) v = normal(rng);
        const StoppingCurve c = stopping_curve(fit_tree(locations, y, config), max_leaves);
        for (std::size_t m = 0; m < max_leaves; ++m) sum[m] += c.relative_errors[m];
    }
    StoppingCurve out;
    out.is_noise_reference = true;
    for (std::size_t m = 0; m < max_leaves; ++m) {
        out.leaf_counts.push_back(m + 1);
        out.relative_errors.push_back(m == 0 ? 1.0 : sum[m] / static_cast<double>(n_monte_carlo));
    }
    return out;
}

StoppingCurve noise_reference_curve(std::size_t n_samples, std::size_t max_leaves, std::size_t n_monte_carlo,
                                    std::uint64_t seed, std::size_t min_cell_points) {
    if (n_samples < 1) throw InputError("noise_reference_curve: need at least one sample");
    PointSet grid;
    grid.dims = 1;
    for (std::size_t i = 0; i < n_samples; ++i) {
        grid.coords.push_back(n_samples == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(n_samples - 1));
    }
    return noise_reference_curve(grid, max_leaves, n_monte_carlo, seed, min_cell_points);
}

std::size_t select_knot_count(const StoppingCurve& data_curve, const StoppingCurve& noise_curve) {
    if (data_curve.leaf_counts != noise_curve.leaf_counts ||
        data_curve.relative_errors.size() != data_curve.leaf_counts.size() ||
        noise_curve.relative_errors.size() != noise_curve.leaf_counts.size()) {
        throw InputError("select_knot_count: curves use different leaf-count grids");
    }
    const auto& lc = data_curve.leaf_counts;
    if (lc.empty()) throw InputError("select_knot_count: empty curves");
    const auto& d = data_curve.relative_errors;
    const auto& e = noise_curve.relative_errors;
    for (std::size_t m = 0; m + 1 < lc.size(); ++m) {
        if (d[m] - d[m + 1] <= e[m] - e[m + 1]) return lc[m];
    }
    return lc.back();
}

}  // namespace tensorfda
