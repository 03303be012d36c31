#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "aalf/forecasters.hpp"
#include "aalf/ingest.hpp"
#include "test_oracles.hpp"

using namespace aalf;

TEST_SUITE_BEGIN("forecasters");

namespace {

WindowedSet windows_from(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    WindowedSet w;
    w.inputs = x;
    w.targets = y;
    w.origin_indices.resize(static_cast<std::size_t>(y.size()));
    for (std::size_t i = 0; i < w.origin_indices.size(); ++i) w.origin_indices[i] = i;
    return w;
}

TimeSeries ar2_series(double phi1, double phi2, double noise, int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> eps(0.0, noise);
    TimeSeries s;
    s.name = "ar2";
    s.values = {0.5, -0.2};
    for (int t = 2; t < n; ++t)
        s.values.push_back(phi1 * s.values[t - 1] + phi2 * s.values[t - 2] + eps(rng));
    return s;
}

}  // namespace

TEST_CASE("fit_ar recovers an exact linear recurrence") {
    TimeSeries s;
    s.values = {1, 2, 4, 8, 16, 32, 64, 128};
    const auto w = make_windows(s, 1);
    const auto model = fit_ar(w, false, 0.0);
    REQUIRE(model.phi.size() == 1);
    CHECK(model.phi(0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(model.residual_std == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(!model.intercept.has_value());
}

TEST_CASE("fit_ar matches the normal-equations oracle and recovers AR(2)") {
    const auto s = ar2_series(0.5, -0.3, 0.01, 1000, 11);
    const auto w = make_windows(s, 2);
    const auto model = fit_ar(w, false, 1e-8);
    const auto reference = testoracle::normal_equations(w.inputs, w.targets, false, 1e-8);
    CHECK((model.phi - reference).cwiseAbs().maxCoeff() < 1e-8);
    // windows are (y_{t-2}, y_{t-1}) so the lag-1 coefficient comes last
    CHECK(model.phi(1) == doctest::Approx(0.5).epsilon(0.1));
    CHECK(model.phi(0) == doctest::Approx(-0.3).epsilon(0.2));
    CHECK(std::abs(model.phi(1) - 0.5) < 0.05);
    CHECK(std::abs(model.phi(0) - (-0.3)) < 0.05);
}

TEST_CASE("fit_ar with intercept matches the oracle on random problems") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 30 + trial * 7, L = 2 + trial % 4;
        Eigen::MatrixXd x(n, L);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < L; ++j) x(i, j) = gauss(rng);
            y(i) = gauss(rng);
        }
        const bool intercept = trial % 2 == 0;
        const auto model = fit_ar(windows_from(x, y), intercept, 1e-8);
        const auto reference = testoracle::normal_equations(x, y, intercept, 1e-8);
        CHECK((model.phi - reference.head(L)).cwiseAbs().maxCoeff() < 1e-8);
        if (intercept) {
            REQUIRE(model.intercept.has_value());
            CHECK(*model.intercept == doctest::Approx(reference(L)).epsilon(1e-8));
        }
    }
}

TEST_CASE("fit_ar on all-zero data returns the zero vector") {
    const auto model = fit_ar(windows_from(Eigen::MatrixXd::Zero(6, 3), Eigen::VectorXd::Zero(6)),
                              false, 1e-8);
    CHECK(model.phi.isZero(0.0));
}

TEST_CASE("fit_ar reports a singular system when ridge is zero") {
    Eigen::MatrixXd x(4, 2);
    x << 1, 1, 2, 2, 3, 3, 4, 4;
    CHECK_THROWS_AS(fit_ar(windows_from(x, Eigen::VectorXd::Ones(4)), false, 0.0), SingularSystem);
}

TEST_CASE("fit_ar beats random coefficient vectors") {
    const auto s = ar2_series(0.6, 0.2, 0.1, 300, 5);
    const auto w = make_windows(s, 3);
    const auto model = fit_ar(w, false, 1e-8);
    const double fitted_loss = (w.inputs * model.phi - w.targets).squaredNorm();
    std::mt19937_64 rng(99);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd candidate(3);
        for (int j = 0; j < 3; ++j) candidate(j) = gauss(rng);
        CHECK(fitted_loss <= (w.inputs * candidate - w.targets).squaredNorm() + 1e-9);
    }
}

TEST_CASE("predict_ar examples") {
    ARModel last;
    last.phi = Eigen::Vector3d(0, 0, 1);
    CHECK(predict_ar(last, Eigen::Vector3d(7, 8, 9)) == doctest::Approx(9));

    ARModel avg;
    avg.phi = Eigen::Vector2d(0.5, 0.5);
    CHECK(predict_ar(avg, Eigen::Vector2d(2, 4)) == doctest::Approx(3));

    CHECK_THROWS_AS(predict_ar(last, Eigen::Vector2d(1, 2)), DimensionMismatch);
}

TEST_CASE("AR prediction is linear: superposition") {
    ARModel model;
    model.phi = Eigen::Vector4d(0.3, -1.2, 0.05, 2.0);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::Vector4d x, z;
        for (int j = 0; j < 4; ++j) {
            x(j) = gauss(rng);
            z(j) = gauss(rng);
        }
        const double a = gauss(rng), b = gauss(rng);
        const double combined = predict_ar(model, a * x + b * z);
        const double parts = a * predict_ar(model, x) + b * predict_ar(model, z);
        CHECK(std::abs(combined - parts) < 1e-10);
    }
}

TEST_CASE("AR models round-trip through JSON bit-exactly") {
    const auto s = ar2_series(0.7, -0.1, 0.05, 200, 17);
    const auto model = fit_ar(make_windows(s, 2), true, 1e-8);
    std::map<std::string, ARModel> models{{"ar2", model}};
    const auto parsed = parse_ar_models(serialize_ar_models(models));
    REQUIRE(parsed.count("ar2") == 1);
    CHECK(parsed.at("ar2").phi == model.phi);
    CHECK(parsed.at("ar2").intercept == model.intercept);
    CHECK(parsed.at("ar2").residual_std == model.residual_std);
}

TEST_CASE("fit_mlp learns a linear target") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> unif(-1, 1);
    const int n = 256, L = 4;
    Eigen::MatrixXd x(n, L);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < L; ++j) x(i, j) = unif(rng);
        y(i) = x.row(i).sum();
    }
    TrainConfig cfg;
    cfg.epochs = 500;
    cfg.batch_size = 32;
    cfg.learning_rate = 1e-2;
    cfg.hidden1 = 8;
    cfg.hidden2 = 8;
    cfg.seed = 4;
    const auto model = fit_mlp(windows_from(x, y), cfg);
    const Eigen::VectorXd pred = predict_mlp(model, x);
    const double train_rmse = std::sqrt((pred - y).squaredNorm() / n);
    CHECK(train_rmse < 0.05);
}

TEST_CASE("fit_mlp detects divergence") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(32, 3);
    Eigen::VectorXd y = Eigen::VectorXd::Random(32);
    TrainConfig cfg;
    cfg.learning_rate = 1e6;
    cfg.optimizer = Optimizer::sgd;
    cfg.epochs = 50;
    CHECK_THROWS_AS(fit_mlp(windows_from(x, y), cfg), DivergenceDetected);
}

TEST_CASE("fit_mlp is deterministic per seed") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(64, 3);
    Eigen::VectorXd y = Eigen::VectorXd::Random(64);
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.hidden1 = 6;
    cfg.hidden2 = 5;
    cfg.seed = 123;
    const auto a = fit_mlp(windows_from(x, y), cfg);
    const auto b = fit_mlp(windows_from(x, y), cfg);
    CHECK(a.w1 == b.w1);
    CHECK(a.b1 == b.b1);
    CHECK(a.w2 == b.w2);
    CHECK(a.b2 == b.b2);
    CHECK(a.w3 == b.w3);
    CHECK(a.b3 == b.b3);
}

namespace {

MLPModel zero_model(int input, int h1, int h2) {
    MLPModel m;
    m.w1 = Eigen::MatrixXd::Zero(h1, input);
    m.b1 = Eigen::VectorXd::Zero(h1);
    m.w2 = Eigen::MatrixXd::Zero(h2, h1);
    m.b2 = Eigen::VectorXd::Zero(h2);
    m.w3 = Eigen::MatrixXd::Zero(1, h2);
    m.b3 = Eigen::VectorXd::Zero(1);
    return m;
}

}  // namespace

TEST_CASE("mlp_gradient of the zero network has the closed-form output bias") {
    const auto model = zero_model(3, 4, 4);
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(10, 3);
    Eigen::VectorXd y = Eigen::VectorXd::Random(10);
    const auto grad = mlp_gradient(model, x, y);
    CHECK(grad.b3(0) == doctest::Approx(-2.0 * y.mean()).epsilon(1e-12));
    CHECK(grad.w1.isZero(0.0));
    CHECK(grad.w2.isZero(0.0));
}

TEST_CASE("mlp_gradient is zero for a dead ReLU unit") {
    auto model = zero_model(2, 2, 2);
    model.w1 << 1, 1, 1, 1;
    model.b1 << -100.0, 0.5;  // unit 0 never activates on inputs in [-1,1]
    model.w2.setOnes();
    model.w3.setOnes();
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(8, 2) * 0.5;
    Eigen::VectorXd y = Eigen::VectorXd::Random(8);
    const auto grad = mlp_gradient(model, x, y);
    CHECK(grad.w1.row(0).isZero(0.0));
    CHECK(grad.b1(0) == 0.0);
}

TEST_CASE("mlp_gradient matches central finite differences") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> gauss;
    auto init = [&](Eigen::MatrixXd& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = 0.5 * gauss(rng);
    };

    MLPModel model = zero_model(4, 3, 3);
    init(model.w1);
    init(model.w2);
    init(model.w3);
    model.b1 = 0.1 * Eigen::VectorXd::Random(3);
    model.b2 = 0.1 * Eigen::VectorXd::Random(3);
    model.b3 = 0.1 * Eigen::VectorXd::Random(1);

    Eigen::MatrixXd x(5, 4);
    init(x);
    Eigen::VectorXd y = Eigen::VectorXd::Random(5);

    const auto grad = mlp_gradient(model, x, y);
    auto loss = [&] { return mlp_loss(model, x, y); };

    auto check_block = [&](Eigen::MatrixXd& weights, const Eigen::MatrixXd& analytic) {
        for (Eigen::Index i = 0; i < weights.rows(); ++i)
            for (Eigen::Index j = 0; j < weights.cols(); ++j) {
                const double numeric = testoracle::central_difference(loss, weights(i, j));
                CHECK(testoracle::relative_error(analytic(i, j), numeric) < 1e-4);
            }
    };
    check_block(model.w1, grad.w1);
    check_block(model.w2, grad.w2);
    check_block(model.w3, grad.w3);
    for (Eigen::Index i = 0; i < model.b1.size(); ++i) {
        const double numeric = testoracle::central_difference(loss, model.b1(i));
        CHECK(testoracle::relative_error(grad.b1(i), numeric) < 1e-4);
    }
    const double numeric_b3 = testoracle::central_difference(loss, model.b3(0));
    CHECK(testoracle::relative_error(grad.b3(0), numeric_b3) < 1e-4);
}

TEST_CASE("predict_mlp with zero weights returns zero; baselines") {
    const auto model = zero_model(3, 4, 4);
    Eigen::VectorXd window(3);
    window << 1, -2, 3;
    CHECK(predict_mlp(model, window) == 0.0);
    CHECK(baseline_last(Eigen::Vector3d(1, 2, 3)) == 3.0);
    CHECK(baseline_mean(Eigen::Vector3d(1, 2, 3)) == doctest::Approx(2.0));
}

TEST_CASE("MLP models round-trip through JSON") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(32, 3);
    Eigen::VectorXd y = Eigen::VectorXd::Random(32);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.hidden1 = 4;
    cfg.hidden2 = 3;
    const auto model = fit_mlp(windows_from(x, y), cfg);
    const auto parsed = parse_mlp(serialize_mlp(model));
    const Eigen::VectorXd a = predict_mlp(model, x);
    const Eigen::VectorXd b = predict_mlp(parsed, x);
    CHECK(a == b);
}

namespace {

Dataset prediction_fixture() {
    Dataset d;
    d.name = "fix";
    d.lag = 2;
    TimeSeries s;
    s.name = "A";
    for (int i = 0; i < 20; ++i) s.values.push_back(std::sin(0.3 * i) + 0.01 * i);
    d.series.push_back(s);
    return d;
}

std::string csv_for(const PredictionTable& table, const std::string& name, Segment seg) {
    std::ostringstream out;
    out << "series,segment,origin_index,value\n";
    const auto& slot = table.rows.at(name)[static_cast<std::size_t>(seg)];
    for (std::size_t i = 0; i < slot.origin_indices.size(); ++i)
        out << name << ',' << segment_name(seg) << ',' << slot.origin_indices[i] << ",1.5\n";
    return out.str();
}

}  // namespace

TEST_CASE("import_predictions accepts exactly matching rows") {
    const auto d = prediction_fixture();
    auto table = make_prediction_table(d);
    std::istringstream in(csv_for(table, "A", Segment::test));
    import_predictions(table, d, Segment::test, "g", in);
    const auto& slot = table.slot("A", Segment::test);
    CHECK(slot.g_pred.size() == static_cast<Eigen::Index>(slot.origin_indices.size()));
    CHECK(slot.g_pred(0) == 1.5);
    CHECK(table.g_provenance == Provenance::imported);
}

TEST_CASE("import_predictions rejects a missing row") {
    const auto d = prediction_fixture();
    auto table = make_prediction_table(d);
    std::string text = csv_for(table, "A", Segment::test);
    text.erase(text.rfind("A,"));  // drop the last data row
    std::istringstream in(text);
    CHECK_THROWS_AS(import_predictions(table, d, Segment::test, "g", in), AlignmentMismatch);
}

TEST_CASE("import_predictions rejects unknown series") {
    const auto d = prediction_fixture();
    auto table = make_prediction_table(d);
    std::istringstream in("series,segment,origin_index,value\nZZ,test,16,1.0\n");
    CHECK_THROWS_AS(import_predictions(table, d, Segment::test, "g", in), UnknownSeries);
}

TEST_CASE("prediction table stays aligned after mixing trained and imported models") {
    const auto d = prediction_fixture();
    auto table = make_prediction_table(d);
    const auto split = split_series(d.series[0].values.size());
    const auto w = make_windows(d.series[0], Segment::test, d.lag, split);
    const auto model = fit_ar(make_windows(d.series[0], Segment::train, d.lag, split), false, 1e-8);
    Eigen::VectorXd f(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) f(i) = predict_ar(model, w.inputs.row(i).transpose());
    table.slot("A", Segment::test).f_pred = f;

    std::istringstream in(csv_for(table, "A", Segment::test));
    import_predictions(table, d, Segment::test, "g", in);

    const auto& slot = table.slot("A", Segment::test);
    CHECK(slot.f_pred.size() == slot.g_pred.size());
    CHECK(slot.truth.size() == slot.g_pred.size());
    CHECK(slot.origin_indices.size() == static_cast<std::size_t>(slot.g_pred.size()));
}

TEST_SUITE_END();
