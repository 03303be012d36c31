#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "aalf/oracle.hpp"

namespace aalf {

struct EmptyData : std::runtime_error { using std::runtime_error::runtime_error; };
struct SingleClass : std::runtime_error { using std::runtime_error::runtime_error; };

/// CART node. feature == -1 marks a leaf; internal nodes send
/// feature <= value to the left child.
struct TreeNode {
    int feature = -1;
    double value = 0.0;
    int left = -1;
    int right = -1;
    double positive_fraction = 0.0;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    int dim = 0;
};

struct TreeParams {
    int max_depth = 0;          // 0 = unlimited
    int min_leaf = 1;
    int feature_subsample = 0;  // 0 = ceil(sqrt(d))
};

struct ForestParams {
    int trees = 128;
    bool bootstrap = true;
    TreeParams tree;
};

struct RandomForest {
    std::vector<DecisionTree> trees;
    std::uint64_t seed = 0;
};

struct RfuParams {
    int members = 10;
    double threshold = 0.5;
    ForestParams forest;
};

struct BalancedForestEnsemble {
    std::vector<RandomForest> members;
    std::vector<std::uint64_t> resample_seeds;
    double threshold = 0.5;
};

struct LogisticModel {
    Eigen::VectorXd weights;
    double bias = 0.0;
};

/// Greedy binary splits minimizing weighted Gini impurity; stops on purity,
/// depth, or min_leaf. Candidate thresholds are midpoints between
/// consecutive distinct values.
DecisionTree fit_tree(const Eigen::MatrixXd& x, const std::vector<char>& y,
                      const TreeParams& params, std::uint64_t seed);

RandomForest fit_forest(const Eigen::MatrixXd& x, const std::vector<char>& y,
                        const ForestParams& params, std::uint64_t seed);

/// Minority class is resampled with replacement until class counts match;
/// every original row is kept exactly once, appended draws follow.
std::pair<Eigen::MatrixXd, std::vector<char>> upsample_balance(const Eigen::MatrixXd& x,
                                                               const std::vector<char>& y,
                                                               std::uint64_t seed);

/// Ensemble of forests, each trained on an independently balanced resample.
BalancedForestEnsemble fit_rfu(const Eigen::MatrixXd& x, const std::vector<char>& y,
                               const RfuParams& params, std::uint64_t seed);

/// Iterative gradient descent with backtracking line search, run to
/// gradient-norm tolerance 1e-6. The l2 penalty applies to weights only.
LogisticModel fit_logistic(const Eigen::MatrixXd& x, const std::vector<char>& y,
                           int iterations = 500, double lr = 1.0, double l2 = 1e-4);

double predict_proba(const DecisionTree& model, const Eigen::VectorXd& x);
double predict_proba(const RandomForest& model, const Eigen::VectorXd& x);
double predict_proba(const BalancedForestEnsemble& model, const Eigen::VectorXd& x);
double predict_proba(const LogisticModel& model, const Eigen::VectorXd& x);

/// Probability ties at the threshold resolve toward selecting f.
inline bool select(double proba, double threshold) { return proba >= threshold; }

template <typename Model>
bool select(const Model& model, const Eigen::VectorXd& x, double threshold) {
    return select(predict_proba(model, x), threshold);
}

/// T independent Bernoulli(p) draws; the RND baseline.
SelectionVector random_selector(std::size_t T, double p, std::uint64_t seed);

std::string serialize_forest(const RandomForest& model);
RandomForest parse_forest(const std::string& text);
std::string serialize_rfu(const BalancedForestEnsemble& model);
BalancedForestEnsemble parse_rfu(const std::string& text);
std::string serialize_logistic(const LogisticModel& model);
LogisticModel parse_logistic(const std::string& text);

}  // namespace aalf
