#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "aalf/forecasters.hpp"
#include "aalf/series.hpp"

namespace aalf {

struct MissingPredictions : std::runtime_error { using std::runtime_error::runtime_error; };

/// Meta-feature vector for one timestep:
/// window (L) + delta_p + delta_e + (mean, min, max), dimension L + 5.
struct FeatureVector {
    Eigen::VectorXd window;
    double delta_p = 0.0;
    double delta_e = 0.0;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;

    Eigen::Index dim() const { return window.size() + 5; }
    Eigen::VectorXd flat() const;
};

/// Prediction errors carried over a segment boundary so the first row of a
/// segment still has a last-known delta_e. Empty fields mean no preceding
/// predictions exist; delta_e then falls back to 0.
struct PrevStep {
    std::optional<double> f_pred;
    std::optional<double> g_pred;
    std::optional<double> truth;

    bool complete() const { return f_pred && g_pred && truth; }
};

struct LabeledSelectionSet {
    Eigen::MatrixXd features;  // n x (L+5)
    std::vector<char> labels;  // 1 = select f
    double p_used = 0.0;
    long b_used = 0;
};

FeatureVector build_feature(const Eigen::VectorXd& window, double f_pred_t, double g_pred_t,
                            double f_pred_prev, double g_pred_prev, double y_prev);

/// One feature row per window; row i's delta_e comes from row i-1's errors,
/// row 0's from prev.
Eigen::MatrixXd build_feature_matrix(const WindowedSet& windows, const SegmentPredictions& preds,
                                     const PrevStep& prev);

/// Feature rows plus optimal-selection labels with B = ceil(p * T).
LabeledSelectionSet build_training_set(const WindowedSet& windows, const SegmentPredictions& preds,
                                       const PrevStep& prev, double p);

/// Row-wise concatenation of per-series sets sharing one p.
LabeledSelectionSet merge_training_sets(const std::vector<LabeledSelectionSet>& sets);

/// Last-step carryover from a fully predicted segment, for the boundary
/// rule of the segment that follows it.
PrevStep carryover(const SegmentPredictions& preds);

std::string labeled_set_csv(const LabeledSelectionSet& set);

}  // namespace aalf
