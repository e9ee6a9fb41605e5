#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace unrestcast::forest {

enum class Task { classification, regression };

std::string_view to_string(Task task);

/// Split nodes send rows with x[feature] <= threshold to `left`. Leaves have
/// feature == -1 and carry the regression mean or the majority class.
struct Node {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
    int samples = 0;

    bool is_leaf() const { return feature < 0; }
};

/// Nodes in preorder; the root is nodes[0].
struct Tree {
    std::vector<Node> nodes;

    double predict(std::span<const double> row) const;
    int depth() const;
};

struct ForestOptions {
    int n_trees = 500;
    /// 0 selects floor(sqrt(#features)), at least 1.
    int mtry = 0;
    /// Nodes with at most this many samples become leaves.
    int min_node_classification = 1;
    int min_node_regression = 5;
    /// 0 uses every hardware thread. Results do not depend on this value.
    unsigned threads = 1;
};

struct Forest {
    Task task = Task::regression;
    std::vector<Tree> trees;
    int mtry = 1;
    std::uint64_t master_seed = 0;
    std::vector<std::string> feature_names;
    /// Class chosen when votes tie: the training majority, else 0.
    int tie_class = 0;
    /// Out-of-bag misclassification rate or mean squared error (NaN when no
    /// row was ever out of bag).
    double oob_error = 0.0;
};

/// Per-tree generator derived from (master_seed, tree_index) only.
std::mt19937_64 tree_rng(std::uint64_t master_seed, std::uint64_t tree_index);

/// Uniform integer in [0, bound) by rejection, identical on every platform.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

int default_mtry(std::size_t n_features);

/// Grows one unpruned CART tree on the rows listed in `sample` (duplicates
/// allowed), drawing `mtry` candidate features per node from `rng`.
Tree grow_tree(const Eigen::MatrixXd& x, std::span<const double> y, std::span<const std::size_t> sample, Task task,
               int mtry, std::mt19937_64& rng, const ForestOptions& options = {});

/// Bootstrap-aggregated CART forest. Classification targets must be 0/1.
/// Requires at least 5 rows and one feature.
Forest fit_forest(const Eigen::MatrixXd& x, std::span<const double> y, std::vector<std::string> feature_names,
                  Task task, std::uint64_t seed, const ForestOptions& options = {});

/// Mean of tree outputs (regression) or the majority-vote class
/// (classification). `row_names` labels the columns of `rows`; every trained
/// feature must be present, in any order.
std::vector<double> forest_predict(const Forest& forest, const Eigen::MatrixXd& rows,
                                   const std::vector<std::string>& row_names);

/// Number of trees voting for class 1, per row.
std::vector<int> forest_votes(const Forest& forest, const Eigen::MatrixXd& rows,
                              const std::vector<std::string>& row_names);

std::string to_json(const Forest& forest);
Forest forest_from_json(std::string_view text);

}  // namespace unrestcast::forest
