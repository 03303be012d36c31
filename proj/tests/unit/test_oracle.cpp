#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "aalf/metrics.hpp"
#include "aalf/oracle.hpp"
#include "test_oracles.hpp"

using namespace aalf;

TEST_SUITE_BEGIN("oracle");

namespace {

SeriesPredictions table_from(const std::vector<double>& f_err, const std::vector<double>& g_err) {
    SeriesPredictions t;
    t.series = "s";
    const std::size_t n = f_err.size();
    t.truth = Eigen::VectorXd::Zero(n);
    t.f_pred.resize(n);
    t.g_pred.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        t.f_pred(i) = f_err[i];
        t.g_pred(i) = g_err[i];
        t.origin_indices.push_back(i);
    }
    return t;
}

std::vector<double> to_vec(const Eigen::VectorXd& v) {
    return {v.data(), v.data() + v.size()};
}

}  // namespace

TEST_CASE("loss_diff elementwise examples") {
    SeriesPredictions t;
    t.series = "s";
    t.f_pred = Eigen::Vector3d(1, 4, 3);
    t.g_pred = Eigen::Vector3d(2, 4, 0);
    t.truth = Eigen::Vector3d(1, 7, 0);
    t.origin_indices = {0, 1, 2};
    const auto ell = loss_diff(t);
    CHECK(ell.ell(0) == doctest::Approx(-1.0));  // 0 - 1
    CHECK(ell.ell(1) == doctest::Approx(0.0));   // f = g
    CHECK(ell.ell(2) == doctest::Approx(9.0));   // 9 - 0
}

TEST_CASE("optimal_selection reproduces the worked example") {
    LossDiffSeries ell{Eigen::Vector4d(-3, 3, -1, 8)};
    const auto s = optimal_selection(ell, 3);
    CHECK(s.s == std::vector<char>{1, 1, 1, 0});
    CHECK(s.required == 3);
    CHECK(s.achieved_count == 3);

    const auto brute = testoracle::brute_force_selection({-3, 3, -1, 8}, 3);
    double loss = 0;
    for (int t = 0; t < 4; ++t) loss += s.s[t] ? ell.ell(t) : 0.0;
    CHECK(loss == doctest::Approx(brute.loss).epsilon(1e-12));
}

TEST_CASE("optimal_selection unconstrained keeps only non-positive terms") {
    LossDiffSeries ell{Eigen::Vector3d(1, 2, 3)};
    const auto s = optimal_selection(ell, 0);
    CHECK(s.s == std::vector<char>{0, 0, 0});
}

TEST_CASE("optimal_selection selects everything when f equals g") {
    LossDiffSeries ell{Eigen::VectorXd::Zero(5)};
    for (long B : {0L, 2L, 5L}) {
        const auto s = optimal_selection(ell, B);
        CHECK(s.achieved_count == 5);
        CHECK(std::all_of(s.s.begin(), s.s.end(), [](char c) { return c == 1; }));
    }
}

TEST_CASE("optimal_selection validates B") {
    LossDiffSeries ell{Eigen::Vector2d(1, -1)};
    CHECK_THROWS_AS(optimal_selection(ell, -1), BOutOfRange);
    CHECK_THROWS_AS(optimal_selection(ell, 3), BOutOfRange);
}

TEST_CASE("optimal_selection equals exhaustive search on random instances") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> t_dist(1, 12);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 200; ++trial) {
        const int T = t_dist(rng);
        std::vector<double> ell_values(T);
        for (auto& v : ell_values) v = gauss(rng);
        if (trial % 3 == 0 && T > 1) ell_values[1] = ell_values[0];  // force ties sometimes
        Eigen::VectorXd ell_vec = Eigen::Map<Eigen::VectorXd>(ell_values.data(), T);
        std::uniform_int_distribution<long> b_dist(0, T);
        const long B = b_dist(rng);

        const auto s = optimal_selection(LossDiffSeries{ell_vec}, B);
        CHECK(s.achieved_count >= B);
        double loss = 0;
        for (int t = 0; t < T; ++t) loss += s.s[static_cast<std::size_t>(t)] ? ell_values[t] : 0.0;
        const auto brute = testoracle::brute_force_selection(ell_values, B);
        CHECK(std::abs(loss - brute.loss) < 1e-12);
    }
}

TEST_CASE("selection loss is monotone in B and dominates both pure strategies") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> gauss;
    const int T = 80;
    std::vector<double> f_err(T), g_err(T);
    for (int t = 0; t < T; ++t) {
        f_err[t] = gauss(rng);
        g_err[t] = 0.7 * gauss(rng);
    }
    const auto table = table_from(f_err, g_err);
    const auto ell = loss_diff(table);

    double previous = -1.0;
    for (long B = 0; B <= T; ++B) {
        const double loss = selection_loss(table, optimal_selection(ell, B));
        CHECK(loss >= previous - 1e-12);
        previous = loss;
    }
    const double unconstrained = selection_loss(table, optimal_selection(ell, 0));
    SelectionVector all_f, all_g;
    all_f.s.assign(T, 1);
    all_g.s.assign(T, 0);
    CHECK(unconstrained <= selection_loss(table, all_f) + 1e-12);
    CHECK(unconstrained <= selection_loss(table, all_g) + 1e-12);
}

TEST_CASE("selection_loss closed forms") {
    const auto t = table_from({1, 0}, {0, 2});
    SelectionVector ones, zeros, mixed;
    ones.s = {1, 1};
    zeros.s = {0, 0};
    mixed.s = {0, 1};
    CHECK(selection_loss(t, ones) == doctest::Approx(1.0));   // 1^2 + 0^2
    CHECK(selection_loss(t, zeros) == doctest::Approx(4.0));  // 0^2 + 2^2
    CHECK(selection_loss(t, mixed) == doctest::Approx(0.0));
}

TEST_CASE("mixed_prediction picks f where selected") {
    const auto t = table_from({1, 2}, {3, 4});
    SelectionVector s;
    s.s = {1, 0};
    const auto mixed = mixed_prediction(t, s);
    CHECK(mixed(0) == 1.0);
    CHECK(mixed(1) == 4.0);
}

TEST_CASE("floor_sweep endpoint and flat region") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> gauss;
    const int T = 60;
    std::vector<double> f_err(T), g_err(T);
    for (int t = 0; t < T; ++t) {
        f_err[t] = gauss(rng);
        g_err[t] = 0.25 * gauss(rng);
    }
    const auto table = table_from(f_err, g_err);

    std::vector<double> ps;
    for (int i = 1; i <= 100; ++i) ps.push_back(i / 100.0);
    const auto curve = floor_sweep(table, ps);
    REQUIRE(curve.points.size() == ps.size());

    const double f_rmse = rmse(to_vec(table.f_pred), to_vec(table.truth));
    CHECK(curve.points.back().p == 1.0);
    CHECK(std::abs(curve.points.back().rmse - f_rmse) < 1e-10);

    // non-increasing as p decreases, with achieved_p >= p everywhere
    for (std::size_t i = 0; i + 1 < curve.points.size(); ++i) {
        CHECK(curve.points[i].rmse <= curve.points[i + 1].rmse + 1e-12);
        CHECK(curve.points[i].achieved_p >= curve.points[i].p);
    }

    // below the unconstrained optimum the curve is exactly flat
    const auto ell = loss_diff(table);
    const auto free = optimal_selection(ell, 0);
    const double flat_limit = static_cast<double>(free.achieved_count) / T;
    const double flat_rmse = curve.points.front().rmse;
    for (const auto& pt : curve.points)
        if (pt.p <= flat_limit) CHECK(pt.rmse == doctest::Approx(flat_rmse).epsilon(1e-14));
}

TEST_CASE("floor_sweep validates inputs") {
    SeriesPredictions empty;
    empty.series = "e";
    std::vector<double> ps{0.5};
    CHECK_THROWS_AS(floor_sweep(empty, ps), EmptySegment);
}

TEST_CASE("sample_p_values is sorted, in range, and seeded") {
    const auto a = sample_p_values(100, 99);
    const auto b = sample_p_values(100, 99);
    const auto c = sample_p_values(100, 100);
    REQUIRE(a.size() == 100);
    CHECK(a == b);
    CHECK(a != c);
    CHECK(std::is_sorted(a.begin(), a.end()));
    for (double p : a) {
        CHECK(p > 0.0);
        CHECK(p < 1.0);
    }
}

TEST_SUITE_END();
