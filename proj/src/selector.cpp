#include "aalf/selector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <json.hpp>

#include "aalf/common.hpp"

namespace aalf {

namespace {

double gini(std::size_t pos, std::size_t n) {
    if (n == 0) return 0.0;
    const double p = static_cast<double>(pos) / static_cast<double>(n);
    return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

struct SplitChoice {
    int feature = -1;
    double value = 0.0;
    double impurity = std::numeric_limits<double>::infinity();
};

struct TreeBuilder {
    const Eigen::MatrixXd& x;
    const std::vector<char>& y;
    TreeParams params;
    std::mt19937_64& rng;
    std::vector<TreeNode> nodes;

    int build(std::vector<std::size_t>& rows, int depth) {
        const std::size_t n = rows.size();
        std::size_t pos = 0;
        for (std::size_t r : rows) pos += y[r] != 0;

        const int id = static_cast<int>(nodes.size());
        nodes.push_back({});
        nodes[id].positive_fraction = static_cast<double>(pos) / static_cast<double>(n);

        const bool pure = pos == 0 || pos == n;
        const bool depth_capped = params.max_depth > 0 && depth >= params.max_depth;
        if (pure || depth_capped || n < 2 * static_cast<std::size_t>(params.min_leaf)) return id;

        const SplitChoice split = best_split(rows, pos);
        if (split.feature < 0) return id;

        std::vector<std::size_t> left_rows, right_rows;
        left_rows.reserve(n);
        right_rows.reserve(n);
        for (std::size_t r : rows)
            (x(static_cast<Eigen::Index>(r), split.feature) <= split.value ? left_rows : right_rows)
                .push_back(r);

        nodes[id].feature = split.feature;
        nodes[id].value = split.value;
        const int left = build(left_rows, depth + 1);
        nodes[id].left = left;
        const int right = build(right_rows, depth + 1);
        nodes[id].right = right;
        return id;
    }

    SplitChoice best_split(const std::vector<std::size_t>& rows, std::size_t total_pos) {
        const int d = static_cast<int>(x.cols());
        int take = params.feature_subsample > 0
                       ? params.feature_subsample
                       : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));
        take = std::min(take, d);

        std::vector<int> features(static_cast<std::size_t>(d));
        std::iota(features.begin(), features.end(), 0);
        for (int i = 0; i < take; ++i) {
            std::uniform_int_distribution<int> pick(i, d - 1);
            std::swap(features[static_cast<std::size_t>(i)],
                      features[static_cast<std::size_t>(pick(rng))]);
        }

        const std::size_t n = rows.size();
        std::vector<std::size_t> order(rows);
        SplitChoice best;
        for (int fi = 0; fi < take; ++fi) {
            const int f = features[static_cast<std::size_t>(fi)];
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return x(static_cast<Eigen::Index>(a), f) < x(static_cast<Eigen::Index>(b), f);
            });
            std::size_t left_pos = 0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                left_pos += y[order[i]] != 0;
                const double here = x(static_cast<Eigen::Index>(order[i]), f);
                const double next = x(static_cast<Eigen::Index>(order[i + 1]), f);
                if (here == next) continue;
                const std::size_t nl = i + 1, nr = n - nl;
                if (nl < static_cast<std::size_t>(params.min_leaf) ||
                    nr < static_cast<std::size_t>(params.min_leaf))
                    continue;
                const double impurity =
                    (static_cast<double>(nl) * gini(left_pos, nl) +
                     static_cast<double>(nr) * gini(total_pos - left_pos, nr)) /
                    static_cast<double>(n);
                if (impurity < best.impurity) {
                    best.impurity = impurity;
                    best.feature = f;
                    best.value = (here + next) / 2.0;
                }
            }
        }
        return best;
    }
};

DecisionTree fit_tree_rows(const Eigen::MatrixXd& x, const std::vector<char>& y,
                           std::vector<std::size_t> rows, const TreeParams& params,
                           std::mt19937_64& rng) {
    TreeBuilder builder{x, y, params, rng, {}};
    builder.build(rows, 0);
    DecisionTree tree;
    tree.nodes = std::move(builder.nodes);
    tree.dim = static_cast<int>(x.cols());
    return tree;
}

void check_training_data(const Eigen::MatrixXd& x, const std::vector<char>& y) {
    if (x.rows() == 0) throw EmptyData("selector training data is empty");
    if (static_cast<std::size_t>(x.rows()) != y.size())
        throw LengthMismatch("selector training data: feature rows and labels differ");
}

}  // namespace

DecisionTree fit_tree(const Eigen::MatrixXd& x, const std::vector<char>& y,
                      const TreeParams& params, std::uint64_t seed) {
    check_training_data(x, y);
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> rows(static_cast<std::size_t>(x.rows()));
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return fit_tree_rows(x, y, std::move(rows), params, rng);
}

RandomForest fit_forest(const Eigen::MatrixXd& x, const std::vector<char>& y,
                        const ForestParams& params, std::uint64_t seed) {
    check_training_data(x, y);
    if (params.trees < 1) throw std::invalid_argument("fit_forest: tree count must be >= 1");

    const std::size_t n = static_cast<std::size_t>(x.rows());
    RandomForest forest;
    forest.seed = seed;
    forest.trees.resize(static_cast<std::size_t>(params.trees));
    for (int t = 0; t < params.trees; ++t) {
        std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        std::vector<std::size_t> rows(n);
        if (params.bootstrap) {
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            for (auto& r : rows) r = pick(rng);
        } else {
            std::iota(rows.begin(), rows.end(), std::size_t{0});
        }
        forest.trees[static_cast<std::size_t>(t)] =
            fit_tree_rows(x, y, std::move(rows), params.tree, rng);
    }
    return forest;
}

std::pair<Eigen::MatrixXd, std::vector<char>> upsample_balance(const Eigen::MatrixXd& x,
                                                               const std::vector<char>& y,
                                                               std::uint64_t seed) {
    check_training_data(x, y);
    std::vector<std::size_t> pos_rows, neg_rows;
    for (std::size_t i = 0; i < y.size(); ++i) (y[i] != 0 ? pos_rows : neg_rows).push_back(i);
    if (pos_rows.empty() || neg_rows.empty())
        throw SingleClass("upsample_balance: both classes must be present");

    const auto& minority = pos_rows.size() < neg_rows.size() ? pos_rows : neg_rows;
    const std::size_t deficit =
        std::max(pos_rows.size(), neg_rows.size()) - std::min(pos_rows.size(), neg_rows.size());

    std::vector<std::size_t> rows(y.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, minority.size() - 1);
    for (std::size_t i = 0; i < deficit; ++i) rows.push_back(minority[pick(rng)]);

    Eigen::MatrixXd bx(static_cast<Eigen::Index>(rows.size()), x.cols());
    std::vector<char> by(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        bx.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
        by[i] = y[rows[i]];
    }
    return {std::move(bx), std::move(by)};
}

BalancedForestEnsemble fit_rfu(const Eigen::MatrixXd& x, const std::vector<char>& y,
                               const RfuParams& params, std::uint64_t seed) {
    check_training_data(x, y);
    if (params.members < 1) throw std::invalid_argument("fit_rfu: member count must be >= 1");
    const bool has_pos = std::any_of(y.begin(), y.end(), [](char v) { return v != 0; });
    const bool has_neg = std::any_of(y.begin(), y.end(), [](char v) { return v == 0; });
    if (!has_pos || !has_neg) throw SingleClass("fit_rfu: both classes must be present");

    BalancedForestEnsemble ensemble;
    ensemble.threshold = params.threshold;
    for (int m = 0; m < params.members; ++m) {
        const std::uint64_t member_seed = derive_seed(seed, static_cast<std::uint64_t>(m));
        const std::uint64_t resample_seed = derive_seed(member_seed, "resample");
        auto [bx, by] = upsample_balance(x, y, resample_seed);
        ensemble.resample_seeds.push_back(resample_seed);
        ensemble.members.push_back(
            fit_forest(bx, by, params.forest, derive_seed(member_seed, "forest")));
    }
    return ensemble;
}

namespace {

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double logistic_loss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& w, double b, double l2) {
    const Eigen::VectorXd z = x * w + Eigen::VectorXd::Constant(x.rows(), b);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        const double m = (y(i) > 0.5 ? 1.0 : -1.0) * z(i);
        loss += m >= 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
    }
    return loss / static_cast<double>(x.rows()) + l2 * w.squaredNorm();
}

}  // namespace

LogisticModel fit_logistic(const Eigen::MatrixXd& x, const std::vector<char>& y, int iterations,
                           double lr, double l2) {
    check_training_data(x, y);
    const Eigen::Index n = x.rows();
    Eigen::VectorXd yv(n);
    for (Eigen::Index i = 0; i < n; ++i) yv(i) = y[static_cast<std::size_t>(i)] != 0 ? 1.0 : 0.0;

    Eigen::VectorXd w = Eigen::VectorXd::Zero(x.cols());
    double b = 0.0;
    double loss = logistic_loss(x, yv, w, b, l2);

    for (int it = 0; it < iterations; ++it) {
        const Eigen::VectorXd z = x * w + Eigen::VectorXd::Constant(n, b);
        Eigen::VectorXd residual(n);
        for (Eigen::Index i = 0; i < n; ++i) residual(i) = sigmoid(z(i)) - yv(i);
        const Eigen::VectorXd gw =
            x.transpose() * residual / static_cast<double>(n) + 2.0 * l2 * w;
        const double gb = residual.mean();

        const double grad_norm_sq = gw.squaredNorm() + gb * gb;
        if (std::sqrt(grad_norm_sq) < 1e-6) break;

        double step = lr;
        bool moved = false;
        for (int half = 0; half < 60; ++half) {
            const Eigen::VectorXd wn = w - step * gw;
            const double bn = b - step * gb;
            const double candidate = logistic_loss(x, yv, wn, bn, l2);
            if (candidate <= loss - 1e-4 * step * grad_norm_sq) {
                w = wn;
                b = bn;
                loss = candidate;
                moved = true;
                break;
            }
            step /= 2.0;
        }
        if (!moved) break;
    }

    LogisticModel model;
    model.weights = std::move(w);
    model.bias = b;
    return model;
}

double predict_proba(const DecisionTree& model, const Eigen::VectorXd& x) {
    if (model.nodes.empty()) throw EmptyData("predict_proba: tree has no nodes");
    if (x.size() != model.dim)
        throw DimensionMismatch("predict_proba: feature dimension does not match tree");
    int at = 0;
    while (model.nodes[static_cast<std::size_t>(at)].feature >= 0) {
        const TreeNode& node = model.nodes[static_cast<std::size_t>(at)];
        at = x(node.feature) <= node.value ? node.left : node.right;
    }
    return model.nodes[static_cast<std::size_t>(at)].positive_fraction;
}

double predict_proba(const RandomForest& model, const Eigen::VectorXd& x) {
    if (model.trees.empty()) throw EmptyData("predict_proba: forest has no trees");
    double sum = 0.0;
    for (const auto& tree : model.trees) sum += predict_proba(tree, x);
    return sum / static_cast<double>(model.trees.size());
}

double predict_proba(const BalancedForestEnsemble& model, const Eigen::VectorXd& x) {
    if (model.members.empty()) throw EmptyData("predict_proba: ensemble has no members");
    double sum = 0.0;
    for (const auto& member : model.members) sum += predict_proba(member, x);
    return sum / static_cast<double>(model.members.size());
}

double predict_proba(const LogisticModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.weights.size())
        throw DimensionMismatch("predict_proba: feature dimension does not match weights");
    return sigmoid(model.weights.dot(x) + model.bias);
}

SelectionVector random_selector(std::size_t T, double p, std::uint64_t seed) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("random_selector: p must be in [0, 1]");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    SelectionVector s;
    s.s.resize(T, 0);
    for (std::size_t t = 0; t < T; ++t) {
        s.s[t] = unit(rng) < p ? 1 : 0;
        s.achieved_count += s.s[t];
    }
    s.required = 0;
    return s;
}

namespace {

nlohmann::json tree_to_json(const DecisionTree& tree) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& n : tree.nodes) {
        if (n.feature < 0) {
            nodes.push_back({{"leaf", n.positive_fraction}});
        } else {
            nodes.push_back(
                {{"f", n.feature}, {"v", n.value}, {"l", n.left}, {"r", n.right}});
        }
    }
    return {{"dim", tree.dim}, {"nodes", std::move(nodes)}};
}

DecisionTree tree_from_json(const nlohmann::json& doc) {
    DecisionTree tree;
    tree.dim = doc.at("dim").get<int>();
    for (const auto& n : doc.at("nodes")) {
        TreeNode node;
        if (n.contains("leaf")) {
            node.positive_fraction = n["leaf"].get<double>();
        } else {
            node.feature = n.at("f").get<int>();
            node.value = n.at("v").get<double>();
            node.left = n.at("l").get<int>();
            node.right = n.at("r").get<int>();
        }
        tree.nodes.push_back(node);
    }
    return tree;
}

nlohmann::json forest_to_json(const RandomForest& model) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& tree : model.trees) trees.push_back(tree_to_json(tree));
    return {{"seed", model.seed}, {"trees", std::move(trees)}};
}

RandomForest forest_from_json(const nlohmann::json& doc) {
    RandomForest model;
    model.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& t : doc.at("trees")) model.trees.push_back(tree_from_json(t));
    return model;
}

nlohmann::json selector_envelope(const std::string& kind) {
    return {{"format", "aalf.selector"}, {"version", 1}, {"kind", kind}};
}

nlohmann::json parse_envelope(const std::string& text, const std::string& kind) {
    nlohmann::json doc = nlohmann::json::parse(text);
    if (doc.value("format", "") != "aalf.selector" || doc.value("version", 0) != 1 ||
        doc.value("kind", "") != kind)
        throw std::runtime_error("selector file is not a version-1 " + kind + " model");
    return doc;
}

}  // namespace

std::string serialize_forest(const RandomForest& model) {
    nlohmann::json doc = selector_envelope("forest");
    doc["model"] = forest_to_json(model);
    return doc.dump() + "\n";
}

RandomForest parse_forest(const std::string& text) {
    return forest_from_json(parse_envelope(text, "forest").at("model"));
}

std::string serialize_rfu(const BalancedForestEnsemble& model) {
    nlohmann::json doc = selector_envelope("rfu");
    doc["threshold"] = model.threshold;
    doc["resample_seeds"] = model.resample_seeds;
    nlohmann::json members = nlohmann::json::array();
    for (const auto& member : model.members) members.push_back(forest_to_json(member));
    doc["members"] = std::move(members);
    return doc.dump() + "\n";
}

BalancedForestEnsemble parse_rfu(const std::string& text) {
    const nlohmann::json doc = parse_envelope(text, "rfu");
    BalancedForestEnsemble model;
    model.threshold = doc.at("threshold").get<double>();
    model.resample_seeds = doc.at("resample_seeds").get<std::vector<std::uint64_t>>();
    for (const auto& m : doc.at("members")) model.members.push_back(forest_from_json(m));
    return model;
}

std::string serialize_logistic(const LogisticModel& model) {
    nlohmann::json doc = selector_envelope("logistic");
    nlohmann::json weights = nlohmann::json::array();
    for (Eigen::Index i = 0; i < model.weights.size(); ++i) weights.push_back(model.weights(i));
    doc["weights"] = std::move(weights);
    doc["bias"] = model.bias;
    return doc.dump() + "\n";
}

LogisticModel parse_logistic(const std::string& text) {
    const nlohmann::json doc = parse_envelope(text, "logistic");
    LogisticModel model;
    const auto& weights = doc.at("weights");
    model.weights.resize(static_cast<Eigen::Index>(weights.size()));
    for (Eigen::Index i = 0; i < model.weights.size(); ++i)
        model.weights(i) = weights[static_cast<std::size_t>(i)].get<double>();
    model.bias = doc.at("bias").get<double>();
    return model;
}

}  // namespace aalf
