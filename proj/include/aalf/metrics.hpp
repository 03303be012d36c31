#pragma once

#include <span>

#include "aalf/common.hpp"

namespace aalf {

struct ConfusionCounts {
    long tp = 0;
    long fp = 0;
    long fn = 0;
    long tn = 0;

    long total() const { return tp + fp + fn + tn; }
    ConfusionCounts& operator+=(const ConfusionCounts& o) {
        tp += o.tp; fp += o.fp; fn += o.fn; tn += o.tn;
        return *this;
    }
};

/// sqrt(mean of squared errors).
double rmse(std::span<const double> pred, std::span<const double> truth);

/// sqrt(sum of squared errors), the variant without the 1/N inside the root.
double rmse_sum(std::span<const double> pred, std::span<const double> truth);

/// mean of 2|y - yhat| / (|y| + |yhat|); a 0/0 term counts as 0. Range [0, 2].
double smape(std::span<const double> pred, std::span<const double> truth);

/// Positive class is label 1 ("select f").
ConfusionCounts confusion(std::span<const char> pred_labels, std::span<const char> true_labels);

/// F1 from counts summed across series: 2TP / (2TP + FP + FN), 0 when the
/// denominator vanishes. This pools before dividing, so it differs from
/// averaging per-series F1.
double f1_pooled(std::span<const ConfusionCounts> counts);

/// Fraction of ones in a selection.
double empirical_p(std::span<const char> selection);

/// Unweighted arithmetic mean over per-series values.
double dataset_average(std::span<const double> per_series_values);

}  // namespace aalf
