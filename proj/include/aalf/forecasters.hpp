#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "aalf/series.hpp"

namespace aalf {

struct SingularSystem : std::runtime_error { using std::runtime_error::runtime_error; };
struct DivergenceDetected : std::runtime_error { using std::runtime_error::runtime_error; };
struct AlignmentMismatch : std::runtime_error { using std::runtime_error::runtime_error; };
struct UnknownSeries : std::runtime_error { using std::runtime_error::runtime_error; };

/// Autoregressive linear forecaster: prediction = phi . window (+ intercept).
struct ARModel {
    Eigen::VectorXd phi;
    std::optional<double> intercept;
    double residual_std = 0.0;
};

/// Least-squares fit of phi on the windowed training rows. A positive ridge
/// keeps the normal equations solvable for any design matrix; the penalty
/// applies to phi only, never to the intercept.
ARModel fit_ar(const WindowedSet& train_windows, bool intercept = false, double ridge = 1e-8);

double predict_ar(const ARModel& model, const Eigen::VectorXd& window);

enum class Optimizer : char { sgd, adam };

struct TrainConfig {
    int epochs = 100;
    int batch_size = 256;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
    Optimizer optimizer = Optimizer::adam;
    double l2 = 0.0;
    int hidden1 = 64;
    int hidden2 = 64;
};

/// Two-hidden-layer ReLU network mapping a window of length L to one value.
/// Weight matrices are (fan_out x fan_in); w3 has a single output row.
struct MLPModel {
    Eigen::MatrixXd w1;
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2;
    Eigen::VectorXd b2;
    Eigen::MatrixXd w3;
    Eigen::VectorXd b3;

    Eigen::Index input_dim() const { return w1.cols(); }
};

struct MLPGradient {
    Eigen::MatrixXd w1;
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2;
    Eigen::VectorXd b2;
    Eigen::MatrixXd w3;
    Eigen::VectorXd b3;
};

/// Mini-batch gradient descent on mean squared error. Bit-identical weights
/// for identical (data, cfg).
MLPModel fit_mlp(const WindowedSet& pooled, const TrainConfig& cfg = {});

/// Analytic gradient of the batch MSE w.r.t. every weight and bias.
MLPGradient mlp_gradient(const MLPModel& model, const Eigen::MatrixXd& inputs,
                         const Eigen::VectorXd& targets);

double mlp_loss(const MLPModel& model, const Eigen::MatrixXd& inputs,
                const Eigen::VectorXd& targets);

double predict_mlp(const MLPModel& model, const Eigen::VectorXd& window);
Eigen::VectorXd predict_mlp(const MLPModel& model, const Eigen::MatrixXd& windows);

double baseline_last(const Eigen::VectorXd& window);
double baseline_mean(const Eigen::VectorXd& window);

enum class Provenance : char { trained_here, imported };

/// Aligned f/g/truth vectors for one segment of one series. Entry i belongs
/// to origin_indices[i]; f_pred or g_pred stay empty until registered.
struct SegmentPredictions {
    std::vector<std::size_t> origin_indices;
    Eigen::VectorXd f_pred;
    Eigen::VectorXd g_pred;
    Eigen::VectorXd truth;
};

struct PredictionTable {
    std::map<std::string, std::array<SegmentPredictions, 3>> rows;
    Provenance f_provenance = Provenance::trained_here;
    Provenance g_provenance = Provenance::trained_here;

    SegmentPredictions& slot(const std::string& series, Segment segment);
    const SegmentPredictions& slot(const std::string& series, Segment segment) const;
};

/// Table skeleton for every series and segment of the dataset: origin
/// indices and truth filled in, prediction columns empty.
PredictionTable make_prediction_table(const Dataset& dataset, double train_fraction = 0.8,
                                      double val_fraction = 0.1);

/// Register externally computed predictions for one model column
/// (model_tag "f" or "g") from a `series,segment,origin_index,value` CSV.
/// Rows for other segments are ignored; the rows for `segment` must cover
/// exactly the windows of every series in the dataset.
void import_predictions(PredictionTable& table, const Dataset& dataset, Segment segment,
                        const std::string& model_tag, std::istream& file);

std::string serialize_ar_models(const std::map<std::string, ARModel>& models);
std::map<std::string, ARModel> parse_ar_models(const std::string& text);
std::string serialize_mlp(const MLPModel& model);
MLPModel parse_mlp(const std::string& text);

}  // namespace aalf
