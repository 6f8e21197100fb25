#pragma once

// Fine tuner: bagged CART regression trees mapping the per-second feature
// rows (seven resampled channels plus the upstream power estimate) to a
// corrected power value.  Trees are grown greedily by SSE reduction with
// midpoint thresholds; the ensemble prediction is the arithmetic mean of
// the tree outputs in tree-index order.

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "evrk/core/rng.hpp"

namespace evrk::bdt {

inline constexpr int kDefaultTreeCount = 10;

// Fixed feature order for fine-tuner rows.
inline constexpr std::array<const char*, 8> kFineTunerFeatureNames = {
    "veh_sp", "road_el", "veh_acc", "aux_ld",
    "wind_sp", "env_temp", "batt_soc", "cnn_est_pow",
};

struct TreeNode {
    std::uint8_t feature = 0;  // internal nodes only
    double value = 0.0;        // threshold (internal) or prediction (leaf)
    std::int32_t left = -1;    // child node indices; -1 marks a leaf
    std::int32_t right = -1;

    [[nodiscard]] bool is_leaf() const { return left < 0; }
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  // pre-order; nodes[0] is the root
    int max_depth = 0;            // limit the tree was grown with; <= 0 means unbounded
    int min_leaf_size = 1;
};

struct BdtModel {
    std::vector<RegressionTree> trees;
    std::uint64_t bootstrap_seed = 0;
    int n_features = 0;  // row arity enforced by predict() when > 0
    std::vector<std::string> feature_names;
};

// Grows a single CART regression tree.  At each node the (feature, threshold)
// pair minimizing the summed child SSE is chosen; candidate thresholds are
// midpoints between consecutive distinct sorted feature values, restricted so
// both children keep at least min_leaf_size rows.  Ties are broken by lowest
// feature index, then lowest threshold.  Growth stops at the depth limit
// (max_depth <= 0 disables it), when a node has fewer than 2*min_leaf_size
// rows, when the node targets have zero variance, or when no legal split
// exists.  Leaves predict the mean of their member targets, summed in
// ascending original-row order.
// Throws std::invalid_argument on an empty table, a row/target length
// mismatch, non-finite values, or min_leaf_size < 1.
[[nodiscard]] RegressionTree fit_tree(const Eigen::MatrixXd& rows,
                                      const Eigen::VectorXd& targets, int max_depth,
                                      int min_leaf_size);

// Routes one row down the tree: feature <= threshold goes left.
[[nodiscard]] double predict_tree(const RegressionTree& tree, const Eigen::VectorXd& row);

// Trains n_trees trees, each on a with-replacement bootstrap resample of the
// full table (resample size = row count) drawn from a stream derived from
// (seed, tree index); the result is identical for any thread count.  Passing
// bootstrap = false is a test hook that trains every tree on the raw table.
// Throws std::invalid_argument when n_trees < 1 or fit_tree would reject the
// table.
[[nodiscard]] BdtModel fit_bagged(const Eigen::MatrixXd& rows, const Eigen::VectorXd& targets,
                                  int n_trees, int max_depth, int min_leaf_size,
                                  std::uint64_t seed, bool bootstrap = true);

// Mean of the per-tree predictions, accumulated in tree-index order.
// Throws std::invalid_argument on an empty ensemble, a non-finite feature, or
// (when the model records its arity) a row of the wrong length.
[[nodiscard]] double predict(const BdtModel& model, const Eigen::VectorXd& row);

struct TreeHyperparams {
    int n_trees = kDefaultTreeCount;
    int max_depth = 0;  // <= 0 means unbounded
    int min_leaf_size = 1;

    bool operator==(const TreeHyperparams&) const = default;
};

struct SearchSpace {
    std::vector<int> tree_counts;
    std::vector<int> max_depths;  // <= 0 entries mean unbounded
    std::vector<int> min_leaf_sizes;
};

// {5, 10, 20} trees x {4, 8, 16, unbounded} depth x {1, 5, 20} leaf sizes.
[[nodiscard]] SearchSpace default_search_space();

struct TuneReportRow {
    TreeHyperparams candidate;
    double cv_rmse = 0.0;
};

struct TuneResult {
    TreeHyperparams best;
    std::vector<TuneReportRow> report;  // one row per candidate, in space order
};

// Exhaustive grid search scored by k-fold cross-validation RMSE (squared
// errors pooled over all validation rows before the root).  Folds are the
// contiguous row ranges [f*n/k, (f+1)*n/k).  Ties are broken by fewer trees,
// then shallower depth (unbounded counts as deepest), then smaller leaf size.
// Throws std::invalid_argument when k_folds < 2, k_folds > row count, or the
// space is empty along any axis.
[[nodiscard]] TuneResult tune_hyperparams(const Eigen::MatrixXd& rows,
                                          const Eigen::VectorXd& targets, int k_folds,
                                          const SearchSpace& space, std::uint64_t seed = 0);

}  // namespace evrk::bdt
