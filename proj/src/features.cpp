#include "aalf/features.hpp"

#include <cmath>
#include <sstream>

#include "aalf/common.hpp"
#include "aalf/oracle.hpp"

namespace aalf {

Eigen::VectorXd FeatureVector::flat() const {
    Eigen::VectorXd v(dim());
    v.head(window.size()) = window;
    v(window.size()) = delta_p;
    v(window.size() + 1) = delta_e;
    v(window.size() + 2) = mean;
    v(window.size() + 3) = min;
    v(window.size() + 4) = max;
    return v;
}

FeatureVector build_feature(const Eigen::VectorXd& window, double f_pred_t, double g_pred_t,
                            double f_pred_prev, double g_pred_prev, double y_prev) {
    if (window.size() == 0) throw EmptyInput("build_feature: empty window");
    FeatureVector fv;
    fv.window = window;
    fv.delta_p = f_pred_t - g_pred_t;
    const double fe = f_pred_prev - y_prev;
    const double ge = g_pred_prev - y_prev;
    fv.delta_e = fe * fe - ge * ge;
    fv.mean = window.mean();
    fv.min = window.minCoeff();
    fv.max = window.maxCoeff();
    return fv;
}

namespace {

void check_alignment(const WindowedSet& windows, const SegmentPredictions& preds) {
    const auto n = static_cast<Eigen::Index>(windows.origin_indices.size());
    if (preds.f_pred.size() == 0 || preds.g_pred.size() == 0)
        throw MissingPredictions("feature construction requires both f and g predictions");
    if (preds.f_pred.size() != n || preds.g_pred.size() != n || preds.truth.size() != n)
        throw MissingPredictions("prediction columns do not cover every window");
    if (preds.origin_indices != windows.origin_indices)
        throw AlignmentMismatch("prediction rows and windows disagree on origin indices");
}

}  // namespace

Eigen::MatrixXd build_feature_matrix(const WindowedSet& windows, const SegmentPredictions& preds,
                                     const PrevStep& prev) {
    check_alignment(windows, preds);
    const Eigen::Index n = windows.size();
    const Eigen::Index lag = windows.lag();
    Eigen::MatrixXd out(n, lag + 5);
    for (Eigen::Index i = 0; i < n; ++i) {
        double fp = 0.0, gp = 0.0, yp = 0.0;
        if (i > 0) {
            fp = preds.f_pred(i - 1);
            gp = preds.g_pred(i - 1);
            yp = preds.truth(i - 1);
        } else if (prev.complete()) {
            fp = *prev.f_pred;
            gp = *prev.g_pred;
            yp = *prev.truth;
        }
        const FeatureVector fv = build_feature(windows.inputs.row(i).transpose(), preds.f_pred(i),
                                               preds.g_pred(i), fp, gp, yp);
        out.row(i) = fv.flat().transpose();
    }
    return out;
}

LabeledSelectionSet build_training_set(const WindowedSet& windows, const SegmentPredictions& preds,
                                       const PrevStep& prev, double p) {
    LabeledSelectionSet set;
    set.features = build_feature_matrix(windows, preds, prev);

    SeriesPredictions table;
    table.origin_indices = preds.origin_indices;
    table.f_pred = preds.f_pred;
    table.g_pred = preds.g_pred;
    table.truth = preds.truth;
    const LossDiffSeries ell = loss_diff(table);
    const long b = static_cast<long>(std::ceil(p * static_cast<double>(ell.ell.size())));
    const SelectionVector s = optimal_selection(ell, b);
    set.labels = s.s;
    set.p_used = p;
    set.b_used = b;
    return set;
}

LabeledSelectionSet merge_training_sets(const std::vector<LabeledSelectionSet>& sets) {
    if (sets.empty()) throw EmptyInput("merge_training_sets: nothing to merge");
    Eigen::Index rows = 0;
    for (const auto& s : sets) {
        if (s.features.cols() != sets.front().features.cols())
            throw DimensionMismatch("merge_training_sets: feature dimensions differ");
        if (s.p_used != sets.front().p_used)
            throw std::invalid_argument("merge_training_sets: mixed p values");
        rows += s.features.rows();
    }
    LabeledSelectionSet out;
    out.features.resize(rows, sets.front().features.cols());
    out.labels.reserve(static_cast<std::size_t>(rows));
    out.p_used = sets.front().p_used;
    Eigen::Index at = 0;
    for (const auto& s : sets) {
        out.features.middleRows(at, s.features.rows()) = s.features;
        out.labels.insert(out.labels.end(), s.labels.begin(), s.labels.end());
        out.b_used += s.b_used;
        at += s.features.rows();
    }
    return out;
}

PrevStep carryover(const SegmentPredictions& preds) {
    PrevStep prev;
    const Eigen::Index n = preds.truth.size();
    if (n == 0 || preds.f_pred.size() != n || preds.g_pred.size() != n) return prev;
    prev.f_pred = preds.f_pred(n - 1);
    prev.g_pred = preds.g_pred(n - 1);
    prev.truth = preds.truth(n - 1);
    return prev;
}

std::string labeled_set_csv(const LabeledSelectionSet& set) {
    const Eigen::Index lag = set.features.cols() - 5;
    std::ostringstream out;
    for (Eigen::Index j = 0; j < lag; ++j) out << "lag_" << j << ",";
    out << "delta_p,delta_e,mean,min,max,label\n";
    for (Eigen::Index i = 0; i < set.features.rows(); ++i) {
        for (Eigen::Index j = 0; j < set.features.cols(); ++j)
            out << format_double(set.features(i, j)) << ",";
        out << int(set.labels[static_cast<std::size_t>(i)]) << "\n";
    }
    return out.str();
}

}  // namespace aalf
