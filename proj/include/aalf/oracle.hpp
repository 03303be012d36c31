#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "aalf/common.hpp"

namespace aalf {

struct BOutOfRange : std::runtime_error { using std::runtime_error::runtime_error; };
struct EmptySegment : std::runtime_error { using std::runtime_error::runtime_error; };

/// Aligned per-timestep predictions of the interpretable model f, the
/// black-box model g and the ground truth over one segment of one series.
struct SeriesPredictions {
    std::string series;
    std::vector<std::size_t> origin_indices;
    Eigen::VectorXd f_pred;
    Eigen::VectorXd g_pred;
    Eigen::VectorXd truth;

    Eigen::Index size() const { return truth.size(); }
    void check_aligned() const;
};

/// Per-timestep squared-error difference between f and g:
/// ell[t] = (f - y)^2 - (g - y)^2. Negative means f is better at t.
struct LossDiffSeries {
    Eigen::VectorXd ell;
};

/// Binary selection s over T timesteps with its minimum-count constraint B.
/// s[t] = 1 means "use f at t".
struct SelectionVector {
    std::vector<char> s;
    long required = 0;       // B
    long achieved_count = 0; // number of ones, always >= required

    std::size_t size() const { return s.size(); }
};

/// One point of the oracle loss floor: constraint p, the RMSE of the
/// optimal mixed prediction, and the selection fraction actually achieved.
struct FloorPoint {
    double p = 0;
    double rmse = 0;
    double achieved_p = 0;
};

struct FloorCurve {
    std::vector<FloorPoint> points;
};

LossDiffSeries loss_diff(const SeriesPredictions& table);

/// The constrained optimum: every t with ell[t] <= 0 is selected, since
/// those steps are free and each one increases how often f is used. When
/// the non-positive entries alone cannot satisfy B, the cheapest positive
/// entries are added (stable on equal values) until exactly B are selected;
/// going past B there would strictly raise the loss. The count therefore
/// exceeds B only when the surplus costs nothing.
SelectionVector optimal_selection(const LossDiffSeries& ell, long B);

/// Total squared error of the mixed prediction chosen by s.
double selection_loss(const SeriesPredictions& table, const SelectionVector& s);

/// Values of the mixed prediction itself: s[t] ? f : g.
Eigen::VectorXd mixed_prediction(const SeriesPredictions& table, const SelectionVector& s);

/// Evaluate the oracle at each p: B = ceil(p * T), optimal selection, RMSE
/// of the mixed prediction.
FloorCurve floor_sweep(const SeriesPredictions& table, std::span<const double> p_values);

/// The default sweep: n values of p drawn uniformly from (0, 1), sorted
/// ascending.
std::vector<double> sample_p_values(int n, std::uint64_t seed);

}  // namespace aalf
