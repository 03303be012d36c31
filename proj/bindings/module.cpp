#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "aalf/features.hpp"
#include "aalf/forecasters.hpp"
#include "aalf/ingest.hpp"
#include "aalf/metrics.hpp"
#include "aalf/oracle.hpp"
#include "aalf/pipeline.hpp"
#include "aalf/selector.hpp"
#include "aalf/stats.hpp"

namespace py = pybind11;
using namespace aalf;

namespace {

std::vector<char> to_labels(const std::vector<int>& v) {
    std::vector<char> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] ? 1 : 0;
    return out;
}

std::vector<int> from_labels(const std::vector<char>& v) {
    return {v.begin(), v.end()};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Constrained forecaster selection: oracle, features, classifiers, pipeline";
    m.attr("__version__") = AALF_VERSION;

    // ingest ---------------------------------------------------------------
    py::class_<Frequency>(m, "Frequency")
        .def_static("from_token", [](const std::string& t) { return Frequency::from_token(t); })
        .def("to_token", &Frequency::to_token);
    py::class_<TimeSeries>(m, "TimeSeries")
        .def(py::init<>())
        .def_readwrite("name", &TimeSeries::name)
        .def_readwrite("values", &TimeSeries::values)
        .def_readwrite("frequency", &TimeSeries::frequency)
        .def_readwrite("start_timestamp", &TimeSeries::start_timestamp)
        .def("length", &TimeSeries::length);
    py::class_<Dataset>(m, "Dataset")
        .def(py::init<>())
        .def_readwrite("name", &Dataset::name)
        .def_readwrite("series", &Dataset::series)
        .def_readwrite("lag", &Dataset::lag)
        .def_readwrite("horizon", &Dataset::horizon);
    py::class_<SplitSpec>(m, "SplitSpec")
        .def_readonly("train_end", &SplitSpec::train_end)
        .def_readonly("val_end", &SplitSpec::val_end)
        .def_readonly("total", &SplitSpec::total);
    py::class_<WindowedSet>(m, "WindowedSet")
        .def_readonly("inputs", &WindowedSet::inputs)
        .def_readonly("targets", &WindowedSet::targets)
        .def_readonly("origin_indices", &WindowedSet::origin_indices)
        .def("size", &WindowedSet::size)
        .def("lag", &WindowedSet::lag);
    py::class_<Standardization>(m, "Standardization")
        .def_readonly("mean", &Standardization::mean)
        .def_readonly("std", &Standardization::std);

    m.def("parse_tsf_text", [](const std::string& text) { return parse_tsf_text(text); });
    m.def("serialize_tsf", &serialize_tsf);
    m.def(
        "parse_csv_text",
        [](const std::string& text, const std::string& layout, const std::string& name) {
            return parse_csv_text(
                text, layout == "long" ? CsvLayout::long_form : CsvLayout::wide_form, name);
        },
        py::arg("text"), py::arg("layout"), py::arg("name") = "csv");
    m.def("split_series", [](std::size_t total) { return split_series(total); });
    m.def("split_series",
          [](std::size_t total, double train_fraction, double val_fraction) {
              return split_series(total, train_fraction, val_fraction);
          });
    m.def("standardize", &standardize);
    m.def("make_windows",
          [](const TimeSeries& s, const std::string& segment, int lag, const SplitSpec& split) {
              const auto seg = segment_from_name(segment);
              if (!seg) throw std::invalid_argument("segment must be train, val or test");
              return make_windows(s, *seg, lag, split);
          });
    m.def("make_windows", [](const TimeSeries& s, int lag) { return make_windows(s, lag); });
    m.def("default_lag", &default_lag);

    // forecasters ------------------------------------------------------------
    py::class_<ARModel>(m, "ARModel")
        .def_readonly("phi", &ARModel::phi)
        .def_readonly("intercept", &ARModel::intercept)
        .def_readonly("residual_std", &ARModel::residual_std);
    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("l2", &TrainConfig::l2)
        .def_readwrite("hidden1", &TrainConfig::hidden1)
        .def_readwrite("hidden2", &TrainConfig::hidden2);
    py::class_<MLPModel>(m, "MLPModel").def("input_dim", &MLPModel::input_dim);

    m.def("fit_ar", &fit_ar, py::arg("train_windows"), py::arg("intercept") = false,
          py::arg("ridge") = 1e-8);
    m.def("predict_ar", &predict_ar);
    m.def("fit_mlp", &fit_mlp, py::arg("pooled"), py::arg("cfg") = TrainConfig{});
    m.def("predict_mlp",
          [](const MLPModel& model, const Eigen::MatrixXd& x) { return predict_mlp(model, x); });
    m.def("baseline_last", &baseline_last);
    m.def("baseline_mean", &baseline_mean);
    m.def("serialize_ar_models", &serialize_ar_models);
    m.def("serialize_mlp", &serialize_mlp);
    m.def("parse_mlp", &parse_mlp);

    // oracle -----------------------------------------------------------------
    py::class_<SeriesPredictions>(m, "SeriesPredictions")
        .def(py::init<>())
        .def_readwrite("series", &SeriesPredictions::series)
        .def_readwrite("origin_indices", &SeriesPredictions::origin_indices)
        .def_readwrite("f_pred", &SeriesPredictions::f_pred)
        .def_readwrite("g_pred", &SeriesPredictions::g_pred)
        .def_readwrite("truth", &SeriesPredictions::truth);
    py::class_<SelectionVector>(m, "SelectionVector")
        .def_property_readonly("s", [](const SelectionVector& v) { return from_labels(v.s); })
        .def_readonly("required", &SelectionVector::required)
        .def_readonly("achieved_count", &SelectionVector::achieved_count);
    py::class_<FloorPoint>(m, "FloorPoint")
        .def_readonly("p", &FloorPoint::p)
        .def_readonly("rmse", &FloorPoint::rmse)
        .def_readonly("achieved_p", &FloorPoint::achieved_p);
    py::class_<FloorCurve>(m, "FloorCurve").def_readonly("points", &FloorCurve::points);

    m.def("loss_diff", [](const SeriesPredictions& t) { return loss_diff(t).ell; });
    m.def("optimal_selection", [](const Eigen::VectorXd& ell, long B) {
        return optimal_selection(LossDiffSeries{ell}, B);
    });
    m.def("selection_loss", [](const SeriesPredictions& t, const std::vector<int>& s) {
        SelectionVector v;
        v.s = to_labels(s);
        return selection_loss(t, v);
    });
    m.def("mixed_prediction", [](const SeriesPredictions& t, const std::vector<int>& s) {
        SelectionVector v;
        v.s = to_labels(s);
        return mixed_prediction(t, v);
    });
    m.def("floor_sweep", [](const SeriesPredictions& t, const std::vector<double>& ps) {
        return floor_sweep(t, ps);
    });
    m.def("sample_p_values", &sample_p_values);

    // features ---------------------------------------------------------------
    py::class_<PrevStep>(m, "PrevStep")
        .def(py::init<>())
        .def_readwrite("f_pred", &PrevStep::f_pred)
        .def_readwrite("g_pred", &PrevStep::g_pred)
        .def_readwrite("truth", &PrevStep::truth);
    py::class_<LabeledSelectionSet>(m, "LabeledSelectionSet")
        .def_readonly("features", &LabeledSelectionSet::features)
        .def_property_readonly(
            "labels", [](const LabeledSelectionSet& s) { return from_labels(s.labels); })
        .def_readonly("p_used", &LabeledSelectionSet::p_used)
        .def_readonly("b_used", &LabeledSelectionSet::b_used);

    m.def("build_feature",
          [](const Eigen::VectorXd& window, double f_t, double g_t, double f_prev, double g_prev,
             double y_prev) {
              return build_feature(window, f_t, g_t, f_prev, g_prev, y_prev).flat();
          });
    m.def("build_feature_matrix", &build_feature_matrix);
    m.def("build_training_set", &build_training_set);
    m.def("carryover", &carryover);
    m.def("labeled_set_csv", &labeled_set_csv);

    py::class_<SegmentPredictions>(m, "SegmentPredictions")
        .def(py::init<>())
        .def_readwrite("origin_indices", &SegmentPredictions::origin_indices)
        .def_readwrite("f_pred", &SegmentPredictions::f_pred)
        .def_readwrite("g_pred", &SegmentPredictions::g_pred)
        .def_readwrite("truth", &SegmentPredictions::truth);

    // selector -----------------------------------------------------------------
    py::class_<ForestParams>(m, "ForestParams").def(py::init<>())
        .def_readwrite("trees", &ForestParams::trees)
        .def_readwrite("bootstrap", &ForestParams::bootstrap);
    py::class_<RfuParams>(m, "RfuParams").def(py::init<>())
        .def_readwrite("members", &RfuParams::members)
        .def_readwrite("threshold", &RfuParams::threshold)
        .def_readwrite("forest", &RfuParams::forest);
    py::class_<RandomForest>(m, "RandomForest");
    py::class_<BalancedForestEnsemble>(m, "BalancedForestEnsemble");
    py::class_<LogisticModel>(m, "LogisticModel")
        .def_readonly("weights", &LogisticModel::weights)
        .def_readonly("bias", &LogisticModel::bias);

    m.def("fit_forest", [](const Eigen::MatrixXd& x, const std::vector<int>& y,
                           const ForestParams& params, std::uint64_t seed) {
        return fit_forest(x, to_labels(y), params, seed);
    });
    m.def("fit_rfu", [](const Eigen::MatrixXd& x, const std::vector<int>& y,
                        const RfuParams& params, std::uint64_t seed) {
        return fit_rfu(x, to_labels(y), params, seed);
    });
    m.def("fit_logistic",
          [](const Eigen::MatrixXd& x, const std::vector<int>& y, int iterations, double lr,
             double l2) { return fit_logistic(x, to_labels(y), iterations, lr, l2); },
          py::arg("x"), py::arg("y"), py::arg("iterations") = 500, py::arg("lr") = 1.0,
          py::arg("l2") = 1e-4);
    m.def("predict_proba", [](const RandomForest& mdl, const Eigen::VectorXd& x) {
        return predict_proba(mdl, x);
    });
    m.def("predict_proba", [](const BalancedForestEnsemble& mdl, const Eigen::VectorXd& x) {
        return predict_proba(mdl, x);
    });
    m.def("predict_proba", [](const LogisticModel& mdl, const Eigen::VectorXd& x) {
        return predict_proba(mdl, x);
    });
    m.def("random_selector", &random_selector);
    m.def("serialize_forest", &serialize_forest);
    m.def("parse_forest", &parse_forest);
    m.def("serialize_rfu", &serialize_rfu);
    m.def("parse_rfu", &parse_rfu);
    m.def("serialize_logistic", &serialize_logistic);
    m.def("parse_logistic", &parse_logistic);

    // metrics --------------------------------------------------------------
    py::class_<ConfusionCounts>(m, "ConfusionCounts")
        .def(py::init<>())
        .def_readwrite("tp", &ConfusionCounts::tp)
        .def_readwrite("fp", &ConfusionCounts::fp)
        .def_readwrite("fn", &ConfusionCounts::fn)
        .def_readwrite("tn", &ConfusionCounts::tn);

    m.def("rmse", [](const std::vector<double>& p, const std::vector<double>& t) {
        return rmse(p, t);
    });
    m.def("rmse_sum", [](const std::vector<double>& p, const std::vector<double>& t) {
        return rmse_sum(p, t);
    });
    m.def("smape", [](const std::vector<double>& p, const std::vector<double>& t) {
        return smape(p, t);
    });
    m.def("confusion", [](const std::vector<int>& pred, const std::vector<int>& truth) {
        const auto p = to_labels(pred), t = to_labels(truth);
        return confusion(p, t);
    });
    m.def("f1_pooled", [](const std::vector<ConfusionCounts>& counts) {
        return f1_pooled(counts);
    });
    m.def("empirical_p", [](const std::vector<int>& s) {
        const auto labels = to_labels(s);
        return empirical_p(labels);
    });
    m.def("dataset_average", [](const std::vector<double>& v) { return dataset_average(v); });

    // stats ----------------------------------------------------------------
    py::class_<RankMatrix>(m, "RankMatrix")
        .def_readonly("ranks", &RankMatrix::ranks)
        .def_readonly("avg_rank", &RankMatrix::avg_rank);
    py::class_<FriedmanResult>(m, "FriedmanResult")
        .def_readonly("statistic", &FriedmanResult::statistic)
        .def_readonly("p_value", &FriedmanResult::p_value);
    py::class_<PairwiseResult>(m, "PairwiseResult")
        .def_readonly("statistic", &PairwiseResult::statistic)
        .def_readonly("p_value", &PairwiseResult::p_value)
        .def_property_readonly("method", [](const PairwiseResult& r) {
            return r.method == PairwiseResult::Method::exact ? "exact" : "normal_approx";
        });
    py::class_<CdResult>(m, "CdResult")
        .def_readonly("avg_rank", &CdResult::avg_rank)
        .def_readonly("groups", &CdResult::groups)
        .def_readonly("friedman_p", &CdResult::friedman_p);

    m.def("average_ranks", &average_ranks);
    m.def("friedman_test", &friedman_test);
    m.def("wilcoxon_signed_rank",
          [](const Eigen::VectorXd& a, const Eigen::VectorXd& b, const std::string& alternative) {
              Alternative alt;
              if (alternative == "greater") alt = Alternative::greater;
              else if (alternative == "less") alt = Alternative::less;
              else if (alternative == "two_sided") alt = Alternative::two_sided;
              else throw std::invalid_argument("alternative must be greater, less or two_sided");
              return wilcoxon_signed_rank(a, b, alt);
          },
          py::arg("a"), py::arg("b"), py::arg("alternative") = "two_sided");
    m.def("cd_groups", &cd_groups, py::arg("losses"), py::arg("alpha") = 0.05,
          py::arg("holm_correction") = false);

    // pipeline ---------------------------------------------------------------
    py::class_<ExperimentConfig>(m, "ExperimentConfig");
    m.def("parse_config_text", &parse_config_text);
    m.def("load_config", &load_config);
    m.def("config_hash", &config_hash);
    m.def("semantic_config_json", &semantic_config_json);
    m.def("cmd_ingest", &cmd_ingest);
    m.def("cmd_train_base", &cmd_train_base);
    m.def("cmd_oracle", &cmd_oracle);
    m.def("cmd_fit_selector", &cmd_fit_selector);
    m.def("cmd_evaluate", &cmd_evaluate);
    m.def("cmd_report", &cmd_report);
}
