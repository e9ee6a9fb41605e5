#include "unrestcast/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

#include "unrestcast/parallel.hpp"

namespace unrestcast::forest {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double impurity = std::numeric_limits<double>::infinity();
};

// Impurity of a node summarised by counts (classification) or sums
// (regression), scaled by node size so children add.
struct Stats {
    double n = 0.0;
    double s1 = 0.0;  // positives, or sum of y
    double s2 = 0.0;  // sum of y^2 (regression)

    void add(double y) {
        n += 1.0;
        s1 += y;
        s2 += y * y;
    }
    void remove(double y) {
        n -= 1.0;
        s1 -= y;
        s2 -= y * y;
    }
    double impurity(Task task) const {
        if (n <= 0.0) return 0.0;
        if (task == Task::classification) {
            const double p = s1 / n;
            return n * 2.0 * p * (1.0 - p);
        }
        return std::max(s2 - s1 * s1 / n, 0.0);
    }
};

class TreeBuilder {
public:
    TreeBuilder(const Eigen::MatrixXd& x, std::span<const double> y, Task task, int mtry, std::mt19937_64& rng,
                const ForestOptions& options, double tie_class)
        : x_(x), y_(y), task_(task), mtry_(mtry), rng_(rng), options_(options), tie_class_(tie_class) {
        features_.resize(static_cast<std::size_t>(x.cols()));
        std::iota(features_.begin(), features_.end(), 0);
    }

    Tree build(std::vector<std::size_t> rows) {
        Tree tree;
        grow(tree, std::move(rows));
        return tree;
    }

private:
    int grow(Tree& tree, std::vector<std::size_t> rows) {
        const int index = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        Stats parent;
        for (auto r : rows) parent.add(y_[r]);
        const double parent_impurity = parent.impurity(task_);
        const int min_node = task_ == Task::classification ? options_.min_node_classification
                                                           : options_.min_node_regression;

        SplitChoice split;
        if (static_cast<int>(rows.size()) > min_node && !is_pure(rows)) {
            split = best_split(rows, parent, parent_impurity);
        }
        if (split.feature < 0) {
            Node& leaf = tree.nodes[static_cast<std::size_t>(index)];
            leaf.samples = static_cast<int>(rows.size());
            leaf.value = is_pure(rows) ? y_[rows.front()] : leaf_value(parent, rows);
            return index;
        }

        std::vector<std::size_t> left_rows;
        std::vector<std::size_t> right_rows;
        for (auto r : rows) {
            (x_(static_cast<Eigen::Index>(r), split.feature) <= split.threshold ? left_rows : right_rows).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();
        const int left = grow(tree, std::move(left_rows));
        const int right = grow(tree, std::move(right_rows));
        Node& node = tree.nodes[static_cast<std::size_t>(index)];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = left;
        node.right = right;
        node.samples = tree.nodes[static_cast<std::size_t>(left)].samples +
                       tree.nodes[static_cast<std::size_t>(right)].samples;
        return index;
    }

    double leaf_value(const Stats& s, const std::vector<std::size_t>& rows) const {
        if (task_ == Task::regression) {
            auto [lo, hi] = std::minmax_element(rows.begin(), rows.end(),
                                                [&](std::size_t a, std::size_t b) { return y_[a] < y_[b]; });
            return std::clamp(s.s1 / s.n, y_[*lo], y_[*hi]);
        }
        const double ones = s.s1;
        const double zeros = s.n - s.s1;
        if (ones != zeros) return ones > zeros ? 1.0 : 0.0;
        return tie_class_;
    }

    bool is_pure(const std::vector<std::size_t>& rows) const {
        const double first = y_[rows.front()];
        return std::all_of(rows.begin(), rows.end(), [&](std::size_t r) { return y_[r] == first; });
    }

    SplitChoice best_split(const std::vector<std::size_t>& rows, const Stats& parent, double parent_impurity) {
        // Partial Fisher-Yates draws mtry distinct features.
        const auto p = features_.size();
        const auto draws = std::min<std::size_t>(static_cast<std::size_t>(mtry_), p);
        for (std::size_t k = 0; k < draws; ++k) {
            const auto pick = k + uniform_below(rng_, p - k);
            std::swap(features_[k], features_[pick]);
        }

        SplitChoice best;
        best.impurity = parent_impurity - kMinGain * std::max(1.0, parent_impurity);
        std::vector<std::pair<double, double>> pairs(rows.size());
        for (std::size_t k = 0; k < draws; ++k) {
            const int f = features_[k];
            for (std::size_t i = 0; i < rows.size(); ++i) {
                pairs[i] = {x_(static_cast<Eigen::Index>(rows[i]), f), y_[rows[i]]};
            }
            std::sort(pairs.begin(), pairs.end());
            Stats left;
            Stats right = parent;
            for (std::size_t i = 0; i + 1 < pairs.size(); ++i) {
                left.add(pairs[i].second);
                right.remove(pairs[i].second);
                const double lo = pairs[i].first;
                const double hi = pairs[i + 1].first;
                if (!(lo < hi)) continue;
                const double impurity = left.impurity(task_) + right.impurity(task_);
                if (impurity < best.impurity) {
                    best.impurity = impurity;
                    best.feature = f;
                    double mid = lo + (hi - lo) / 2.0;
                    if (!(mid < hi)) mid = lo;
                    best.threshold = mid;
                }
            }
        }
        return best;
    }

    static constexpr double kMinGain = 1e-12;

    const Eigen::MatrixXd& x_;
    std::span<const double> y_;
    Task task_;
    int mtry_;
    std::mt19937_64& rng_;
    const ForestOptions& options_;
    double tie_class_;
    std::vector<int> features_;
};

std::vector<Eigen::Index> column_map(const Forest& forest, const std::vector<std::string>& row_names,
                                     Eigen::Index n_cols) {
    if (static_cast<Eigen::Index>(row_names.size()) != n_cols) {
        throw std::invalid_argument("one name per prediction column required");
    }
    std::vector<Eigen::Index> map;
    for (const auto& f : forest.feature_names) {
        auto it = std::find(row_names.begin(), row_names.end(), f);
        if (it == row_names.end()) throw std::invalid_argument(fmt::format("missing feature {}", f));
        map.push_back(static_cast<Eigen::Index>(it - row_names.begin()));
    }
    return map;
}

Eigen::MatrixXd reorder(const Eigen::MatrixXd& rows, const std::vector<Eigen::Index>& map) {
    return rows(Eigen::all, map);
}

int majority(int ones, int total, int tie_class) {
    const int zeros = total - ones;
    if (ones == zeros) return tie_class;
    return ones > zeros ? 1 : 0;
}

}  // namespace

std::string_view to_string(Task task) { return task == Task::classification ? "classification" : "regression"; }

double Tree::predict(std::span<const double> row) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
        const Node& n = nodes[i];
        i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes[i].value;
}

int Tree::depth() const {
    std::vector<int> d(nodes.size(), 0);
    int deepest = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        deepest = std::max(deepest, d[i]);
        if (!nodes[i].is_leaf()) {
            d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
        }
    }
    return deepest;
}

std::mt19937_64 tree_rng(std::uint64_t master_seed, std::uint64_t tree_index) {
    return std::mt19937_64(splitmix64(master_seed ^ splitmix64(tree_index)));
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("empty range");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t v = rng();
    while (v >= limit) v = rng();
    return v % bound;
}

int default_mtry(std::size_t n_features) {
    const int m = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n_features))));
    return std::max(1, m);
}

Tree grow_tree(const Eigen::MatrixXd& x, std::span<const double> y, std::span<const std::size_t> sample, Task task,
               int mtry, std::mt19937_64& rng, const ForestOptions& options) {
    if (sample.empty()) throw std::invalid_argument("cannot grow a tree on no rows");
    TreeBuilder builder(x, y, task, mtry, rng, options, 0.0);
    return builder.build({sample.begin(), sample.end()});
}

Forest fit_forest(const Eigen::MatrixXd& x, std::span<const double> y, std::vector<std::string> feature_names,
                  Task task, std::uint64_t seed, const ForestOptions& options) {
    const auto n = static_cast<std::size_t>(x.rows());
    if (y.size() != n) throw std::invalid_argument("feature rows and target length differ");
    if (x.cols() < 1) throw std::invalid_argument("forest needs at least one predictor");
    if (static_cast<Eigen::Index>(feature_names.size()) != x.cols()) {
        throw std::invalid_argument("one name per feature column required");
    }
    const int min_node = task == Task::classification ? options.min_node_classification : options.min_node_regression;
    if (n < 5 || n < static_cast<std::size_t>(min_node)) {
        throw std::invalid_argument(fmt::format("forest needs at least {} rows, got {}", std::max(5, min_node), n));
    }
    if (options.n_trees < 1) throw std::invalid_argument("forest needs at least one tree");
    int ones = 0;
    for (double v : y) {
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite target value");
        if (task == Task::classification) {
            if (v != 0.0 && v != 1.0) throw std::invalid_argument("classification targets must be 0 or 1");
            ones += v == 1.0;
        }
    }

    Forest forest;
    forest.task = task;
    forest.master_seed = seed;
    forest.feature_names = std::move(feature_names);
    forest.mtry = options.mtry > 0 ? std::min<int>(options.mtry, static_cast<int>(x.cols()))
                                   : default_mtry(static_cast<std::size_t>(x.cols()));
    forest.tie_class = majority(ones, static_cast<int>(n), 0);
    forest.trees.resize(static_cast<std::size_t>(options.n_trees));
    std::vector<std::vector<bool>> in_bag(static_cast<std::size_t>(options.n_trees));

    parallel_for(forest.trees.size(), options.threads, [&](std::size_t t) {
        auto rng = tree_rng(seed, t);
        std::vector<std::size_t> sample(n);
        std::vector<bool> bag(n, false);
        for (auto& s : sample) {
            s = static_cast<std::size_t>(uniform_below(rng, n));
            bag[s] = true;
        }
        TreeBuilder builder(x, y, task, forest.mtry, rng, options, forest.tie_class);
        forest.trees[t] = builder.build(std::move(sample));
        in_bag[t] = std::move(bag);
    });

    std::vector<double> sum(n, 0.0);
    std::vector<int> votes(n, 0);
    std::vector<int> seen(n, 0);
    std::vector<double> row(static_cast<std::size_t>(x.cols()));
    for (std::size_t t = 0; t < forest.trees.size(); ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            if (in_bag[t][i]) continue;
            for (Eigen::Index j = 0; j < x.cols(); ++j) row[static_cast<std::size_t>(j)] = x(static_cast<Eigen::Index>(i), j);
            const double p = forest.trees[t].predict(row);
            sum[i] += p;
            votes[i] += p == 1.0;
            ++seen[i];
        }
    }
    double err = 0.0;
    int counted = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (seen[i] == 0) continue;
        ++counted;
        if (task == Task::classification) {
            err += majority(votes[i], seen[i], forest.tie_class) != static_cast<int>(y[i]);
        } else {
            const double d = sum[i] / seen[i] - y[i];
            err += d * d;
        }
    }
    forest.oob_error = counted ? err / counted : std::numeric_limits<double>::quiet_NaN();
    return forest;
}

std::vector<int> forest_votes(const Forest& forest, const Eigen::MatrixXd& rows,
                              const std::vector<std::string>& row_names) {
    const Eigen::MatrixXd ordered = reorder(rows, column_map(forest, row_names, rows.cols()));
    std::vector<int> out(static_cast<std::size_t>(ordered.rows()), 0);
    std::vector<double> row(static_cast<std::size_t>(ordered.cols()));
    for (Eigen::Index r = 0; r < ordered.rows(); ++r) {
        for (Eigen::Index j = 0; j < ordered.cols(); ++j) row[static_cast<std::size_t>(j)] = ordered(r, j);
        for (const auto& tree : forest.trees) out[static_cast<std::size_t>(r)] += tree.predict(row) == 1.0;
    }
    return out;
}

std::vector<double> forest_predict(const Forest& forest, const Eigen::MatrixXd& rows,
                                   const std::vector<std::string>& row_names) {
    if (forest.task == Task::classification) {
        const auto votes = forest_votes(forest, rows, row_names);
        const int total = static_cast<int>(forest.trees.size());
        std::vector<double> out;
        out.reserve(votes.size());
        for (int v : votes) out.push_back(majority(v, total, forest.tie_class));
        return out;
    }
    const Eigen::MatrixXd ordered = reorder(rows, column_map(forest, row_names, rows.cols()));
    std::vector<double> out(static_cast<std::size_t>(ordered.rows()), 0.0);
    std::vector<double> row(static_cast<std::size_t>(ordered.cols()));
    for (Eigen::Index r = 0; r < ordered.rows(); ++r) {
        for (Eigen::Index j = 0; j < ordered.cols(); ++j) row[static_cast<std::size_t>(j)] = ordered(r, j);
        double acc = 0.0;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (const auto& tree : forest.trees) {
            const double v = tree.predict(row);
            acc += v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        // Rounding in the sum must not push the mean outside its summands.
        out[static_cast<std::size_t>(r)] = std::clamp(acc / static_cast<double>(forest.trees.size()), lo, hi);
    }
    return out;
}

std::string to_json(const Forest& forest) {
    nlohmann::json j;
    j["format"] = "unrestcast.forest";
    j["version"] = 1;
    j["task"] = to_string(forest.task);
    j["mtry"] = forest.mtry;
    j["seed"] = forest.master_seed;
    j["tie_class"] = forest.tie_class;
    j["features"] = forest.feature_names;
    auto& trees = j["trees"] = nlohmann::json::array();
    for (const auto& t : forest.trees) {
        auto nodes = nlohmann::json::array();
        for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value, n.samples});
        trees.push_back(std::move(nodes));
    }
    return j.dump();
}

Forest forest_from_json(std::string_view text) {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format") != "unrestcast.forest" || j.at("version") != 1) {
        throw std::invalid_argument("unsupported forest artifact");
    }
    Forest f;
    const auto task = j.at("task").get<std::string>();
    if (task != "classification" && task != "regression") throw std::invalid_argument("unknown forest task " + task);
    f.task = task == "classification" ? Task::classification : Task::regression;
    f.mtry = j.at("mtry").get<int>();
    f.master_seed = j.at("seed").get<std::uint64_t>();
    f.tie_class = j.at("tie_class").get<int>();
    f.feature_names = j.at("features").get<std::vector<std::string>>();
    const int n_features = static_cast<int>(f.feature_names.size());
    for (const auto& jt : j.at("trees")) {
        Tree t;
        for (const auto& jn : jt) {
            Node n{jn.at(0).get<int>(),    jn.at(1).get<double>(), jn.at(2).get<int>(),
                   jn.at(3).get<int>(),    jn.at(4).get<double>(), jn.at(5).get<int>()};
            t.nodes.push_back(n);
        }
        const int size = static_cast<int>(t.nodes.size());
        for (const auto& n : t.nodes) {
            if (n.is_leaf()) continue;
            if (n.feature >= n_features || n.left <= 0 || n.left >= size || n.right <= 0 || n.right >= size) {
                throw std::invalid_argument("corrupt tree in forest artifact");
            }
        }
        if (t.nodes.empty()) throw std::invalid_argument("empty tree in forest artifact");
        f.trees.push_back(std::move(t));
    }
    f.oob_error = std::numeric_limits<double>::quiet_NaN();
    return f;
}

}  // namespace unrestcast::forest
