#include "evrk/bdt/bdt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "evrk/core/parallel.hpp"

namespace evrk::bdt {
namespace {

constexpr std::uint64_t kBootstrapStream = 0x31;
constexpr std::uint64_t kTuneStream = 0x32;

void check_table(const Eigen::MatrixXd& rows, const Eigen::VectorXd& targets,
                 int min_leaf_size) {
    if (rows.rows() == 0) throw std::invalid_argument("fit_tree: empty feature table");
    if (rows.rows() != targets.size()) {
        throw std::invalid_argument("fit_tree: row/target count mismatch");
    }
    if (min_leaf_size < 1) throw std::invalid_argument("fit_tree: min_leaf_size < 1");
    if (!rows.allFinite() || !targets.allFinite()) {
        throw std::invalid_argument("fit_tree: non-finite input");
    }
}

struct BestSplit {
    bool found = false;
    int feature = 0;
    double threshold = 0.0;
    double sse = std::numeric_limits<double>::infinity();
};

// Midpoint that is guaranteed to separate lo from hi under the "<= goes
// left" rule even when rounding would push (lo+hi)/2 onto hi.
double split_midpoint(double lo, double hi) {
    double mid = lo + (hi - lo) / 2.0;
    if (mid >= hi) mid = lo;
    return mid;
}

// Members arrive in ascending original-row order and children preserve it,
// so every mean below is summed in a fixed order.
double member_mean(const Eigen::VectorXd& targets, const std::vector<int>& members) {
    double sum = 0.0;
    for (int i : members) sum += targets[i];
    return sum / static_cast<double>(members.size());
}

BestSplit find_best_split(const Eigen::MatrixXd& rows, const Eigen::VectorXd& targets,
                          const std::vector<int>& members, int min_leaf_size) {
    const auto m = static_cast<int>(members.size());
    BestSplit best;
    std::vector<std::pair<double, int>> order(members.size());
    std::vector<double> sy(members.size() + 1), syy(members.size() + 1);
    for (int f = 0; f < rows.cols(); ++f) {
        for (int i = 0; i < m; ++i) {
            order[static_cast<std::size_t>(i)] = {rows(members[static_cast<std::size_t>(i)], f),
                                                  members[static_cast<std::size_t>(i)]};
        }
        std::sort(order.begin(), order.end());
        sy[0] = syy[0] = 0.0;
        for (int i = 0; i < m; ++i) {
            const double y = targets[order[static_cast<std::size_t>(i)].second];
            sy[static_cast<std::size_t>(i) + 1] = sy[static_cast<std::size_t>(i)] + y;
            syy[static_cast<std::size_t>(i) + 1] = syy[static_cast<std::size_t>(i)] + y * y;
        }
        const double total_sum = sy[static_cast<std::size_t>(m)];
        const double total_sq = syy[static_cast<std::size_t>(m)];
        for (int k = min_leaf_size; k <= m - min_leaf_size; ++k) {
            const double lo = order[static_cast<std::size_t>(k - 1)].first;
            const double hi = order[static_cast<std::size_t>(k)].first;
            if (lo == hi) continue;  // thresholds sit between distinct values only
            const double ls = sy[static_cast<std::size_t>(k)];
            const double lq = syy[static_cast<std::size_t>(k)];
            const double sse = (lq - ls * ls / k) +
                               ((total_sq - lq) -
                                (total_sum - ls) * (total_sum - ls) / (m - k));
            if (sse < best.sse) {
                best.found = true;
                best.feature = f;
                best.threshold = split_midpoint(lo, hi);
                best.sse = sse;
            }
        }
    }
    return best;
}

struct TreeBuilder {
    const Eigen::MatrixXd& rows;
    const Eigen::VectorXd& targets;
    int max_depth;
    int min_leaf_size;
    std::vector<TreeNode> nodes;

    std::int32_t leaf(const std::vector<int>& members) {
        TreeNode node;
        node.value = member_mean(targets, members);
        nodes.push_back(node);
        return static_cast<std::int32_t>(nodes.size() - 1);
    }

    std::int32_t build(const std::vector<int>& members, int depth) {
        const auto m = static_cast<int>(members.size());
        if (m < 2 * min_leaf_size) return leaf(members);
        if (max_depth > 0 && depth >= max_depth) return leaf(members);
        double t_min = targets[members.front()], t_max = t_min;
        for (int i : members) {
            t_min = std::min(t_min, targets[i]);
            t_max = std::max(t_max, targets[i]);
        }
        if (t_min == t_max) return leaf(members);  // zero variance
        const BestSplit split = find_best_split(rows, targets, members, min_leaf_size);
        if (!split.found) return leaf(members);

        const auto me = static_cast<std::int32_t>(nodes.size());
        TreeNode node;
        node.feature = static_cast<std::uint8_t>(split.feature);
        node.value = split.threshold;
        nodes.push_back(node);

        std::vector<int> left_members, right_members;
        left_members.reserve(members.size());
        right_members.reserve(members.size());
        for (int i : members) {
            (rows(i, split.feature) <= split.threshold ? left_members : right_members)
                .push_back(i);
        }
        const std::int32_t l = build(left_members, depth + 1);
        const std::int32_t r = build(right_members, depth + 1);
        nodes[static_cast<std::size_t>(me)].left = l;
        nodes[static_cast<std::size_t>(me)].right = r;
        return me;
    }
};

double rmse_of(const std::vector<double>& sq_errors) {
    double sum = 0.0;
    for (double e : sq_errors) sum += e;
    return std::sqrt(sum / static_cast<double>(sq_errors.size()));
}

}  // namespace

RegressionTree fit_tree(const Eigen::MatrixXd& rows, const Eigen::VectorXd& targets,
                        int max_depth, int min_leaf_size) {
    check_table(rows, targets, min_leaf_size);
    TreeBuilder builder{rows, targets, max_depth, min_leaf_size, {}};
    std::vector<int> all(static_cast<std::size_t>(rows.rows()));
    std::iota(all.begin(), all.end(), 0);
    builder.build(all, 0);
    RegressionTree tree;
    tree.nodes = std::move(builder.nodes);
    tree.max_depth = max_depth;
    tree.min_leaf_size = min_leaf_size;
    return tree;
}

double predict_tree(const RegressionTree& tree, const Eigen::VectorXd& row) {
    if (tree.nodes.empty()) throw std::invalid_argument("predict_tree: empty tree");
    std::size_t node = 0;
    while (!tree.nodes[node].is_leaf()) {
        const TreeNode& n = tree.nodes[node];
        if (n.feature >= row.size()) {
            throw std::invalid_argument("predict_tree: row has too few features");
        }
        node = static_cast<std::size_t>(row[n.feature] <= n.value ? n.left : n.right);
    }
    return tree.nodes[node].value;
}

BdtModel fit_bagged(const Eigen::MatrixXd& rows, const Eigen::VectorXd& targets, int n_trees,
                    int max_depth, int min_leaf_size, std::uint64_t seed, bool bootstrap) {
    if (n_trees < 1) throw std::invalid_argument("fit_bagged: n_trees < 1");
    check_table(rows, targets, min_leaf_size);

    BdtModel model;
    model.trees.resize(static_cast<std::size_t>(n_trees));
    model.bootstrap_seed = seed;
    model.n_features = static_cast<int>(rows.cols());
    const auto n = rows.rows();
    core::parallel_for(static_cast<std::size_t>(n_trees), [&](std::size_t t) {
        if (bootstrap) {
            auto rng = core::derived_engine(seed, kBootstrapStream, t);
            Eigen::MatrixXd boot_rows(n, rows.cols());
            Eigen::VectorXd boot_targets(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto pick = static_cast<Eigen::Index>(
                    core::uniform_below(rng, static_cast<std::uint64_t>(n)));
                boot_rows.row(i) = rows.row(pick);
                boot_targets[i] = targets[pick];
            }
            model.trees[t] = fit_tree(boot_rows, boot_targets, max_depth, min_leaf_size);
        } else {
            model.trees[t] = fit_tree(rows, targets, max_depth, min_leaf_size);
        }
    });
    return model;
}

double predict(const BdtModel& model, const Eigen::VectorXd& row) {
    if (model.trees.empty()) throw std::invalid_argument("predict: empty ensemble");
    if (!row.allFinite()) throw std::invalid_argument("predict: non-finite feature");
    if (model.n_features > 0 && row.size() != model.n_features) {
        throw std::invalid_argument("predict: feature row has wrong arity");
    }
    double sum = 0.0;
    for (const auto& tree : model.trees) sum += predict_tree(tree, row);
    return sum / static_cast<double>(model.trees.size());
}

SearchSpace default_search_space() {
    return SearchSpace{{5, 10, 20}, {4, 8, 16, 0}, {1, 5, 20}};
}

TuneResult tune_hyperparams(const Eigen::MatrixXd& rows, const Eigen::VectorXd& targets,
                            int k_folds, const SearchSpace& space, std::uint64_t seed) {
    if (k_folds < 2) throw std::invalid_argument("tune_hyperparams: k_folds < 2");
    if (rows.rows() < k_folds) {
        throw std::invalid_argument("tune_hyperparams: fewer rows than folds");
    }
    if (space.tree_counts.empty() || space.max_depths.empty() ||
        space.min_leaf_sizes.empty()) {
        throw std::invalid_argument("tune_hyperparams: empty search space");
    }
    check_table(rows, targets, 1);

    const auto n = rows.rows();
    const auto depth_key = [](int d) {
        return d <= 0 ? std::numeric_limits<int>::max() : d;
    };

    TuneResult result;
    bool have_best = false;
    double best_rmse = std::numeric_limits<double>::infinity();
    std::uint64_t candidate_index = 0;
    for (int n_trees : space.tree_counts) {
        for (int max_depth : space.max_depths) {
            for (int min_leaf : space.min_leaf_sizes) {
                std::vector<double> sq_errors;
                sq_errors.reserve(static_cast<std::size_t>(n));
                for (int f = 0; f < k_folds; ++f) {
                    const auto lo = n * f / k_folds;
                    const auto hi = n * (f + 1) / k_folds;
                    const auto n_train = n - (hi - lo);
                    Eigen::MatrixXd train_rows(n_train, rows.cols());
                    Eigen::VectorXd train_targets(n_train);
                    Eigen::Index w = 0;
                    for (Eigen::Index i = 0; i < n; ++i) {
                        if (i >= lo && i < hi) continue;
                        train_rows.row(w) = rows.row(i);
                        train_targets[w] = targets[i];
                        ++w;
                    }
                    auto sub_rng = core::derived_engine(
                        seed, kTuneStream,
                        candidate_index * static_cast<std::uint64_t>(k_folds) +
                            static_cast<std::uint64_t>(f));
                    const BdtModel model = fit_bagged(train_rows, train_targets, n_trees,
                                                      max_depth, min_leaf, sub_rng());
                    for (Eigen::Index i = lo; i < hi; ++i) {
                        const double err =
                            predict(model, rows.row(i).transpose()) - targets[i];
                        sq_errors.push_back(err * err);
                    }
                }
                const double rmse = rmse_of(sq_errors);
                const TreeHyperparams candidate{n_trees, max_depth, min_leaf};
                result.report.push_back({candidate, rmse});
                const bool better =
                    !have_best || rmse < best_rmse ||
                    (rmse == best_rmse &&
                     std::tuple(candidate.n_trees, depth_key(candidate.max_depth),
                                candidate.min_leaf_size) <
                         std::tuple(result.best.n_trees, depth_key(result.best.max_depth),
                                    result.best.min_leaf_size));
                if (better) {
                    have_best = true;
                    best_rmse = rmse;
                    result.best = candidate;
                }
                ++candidate_index;
            }
        }
    }
    return result;
}

}  // namespace evrk::bdt
