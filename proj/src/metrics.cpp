#include "aalf/metrics.hpp"

#include <cmath>

namespace aalf {

namespace {

double sum_squared_error(std::span<const double> pred, std::span<const double> truth) {
    if (pred.size() != truth.size())
        throw LengthMismatch("pred and truth lengths differ");
    if (pred.empty())
        throw EmptyInput("no values to score");
    double sum = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        double d = pred[i] - truth[i];
        sum += d * d;
    }
    return sum;
}

}  // namespace

double rmse(std::span<const double> pred, std::span<const double> truth) {
    return std::sqrt(sum_squared_error(pred, truth) / static_cast<double>(pred.size()));
}

double rmse_sum(std::span<const double> pred, std::span<const double> truth) {
    return std::sqrt(sum_squared_error(pred, truth));
}

double smape(std::span<const double> pred, std::span<const double> truth) {
    if (pred.size() != truth.size())
        throw LengthMismatch("pred and truth lengths differ");
    if (pred.empty())
        throw EmptyInput("no values to score");
    double sum = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        double denom = std::abs(truth[i]) + std::abs(pred[i]);
        if (denom > 0)
            sum += 2.0 * std::abs(truth[i] - pred[i]) / denom;
    }
    return sum / static_cast<double>(pred.size());
}

ConfusionCounts confusion(std::span<const char> pred_labels, std::span<const char> true_labels) {
    if (pred_labels.size() != true_labels.size())
        throw LengthMismatch("label vectors differ in length");
    ConfusionCounts c;
    for (std::size_t i = 0; i < pred_labels.size(); ++i) {
        bool p = pred_labels[i] != 0;
        bool t = true_labels[i] != 0;
        if (p && t) ++c.tp;
        else if (p && !t) ++c.fp;
        else if (!p && t) ++c.fn;
        else ++c.tn;
    }
    return c;
}

double f1_pooled(std::span<const ConfusionCounts> counts) {
    ConfusionCounts pooled;
    for (const auto& c : counts) pooled += c;
    double denom = 2.0 * static_cast<double>(pooled.tp) + static_cast<double>(pooled.fp) +
                   static_cast<double>(pooled.fn);
    if (denom == 0) return 0.0;
    return 2.0 * static_cast<double>(pooled.tp) / denom;
}

double empirical_p(std::span<const char> selection) {
    if (selection.empty())
        throw EmptyInput("empty selection");
    long ones = 0;
    for (char s : selection) ones += s != 0;
    return static_cast<double>(ones) / static_cast<double>(selection.size());
}

double dataset_average(std::span<const double> per_series_values) {
    if (per_series_values.empty())
        throw EmptyInput("no per-series values");
    double sum = 0;
    for (double v : per_series_values) sum += v;
    return sum / static_cast<double>(per_series_values.size());
}

}  // namespace aalf
