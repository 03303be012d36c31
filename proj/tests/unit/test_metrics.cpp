#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "aalf/metrics.hpp"

using namespace aalf;

TEST_SUITE_BEGIN("metrics");

TEST_CASE("rmse identities") {
    const std::vector<double> v{1.5, -2.0, 7.0};
    CHECK(rmse(v, v) == 0.0);

    const std::vector<double> zeros{0, 0}, truth{3, 4};
    CHECK(rmse(zeros, truth) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));

    const std::vector<double> two{2}, five{5};
    CHECK(rmse(two, five) == doctest::Approx(3.0));

    CHECK(rmse_sum(zeros, truth) == doctest::Approx(5.0));
    CHECK_THROWS_AS(rmse(zeros, v), LengthMismatch);
    const std::vector<double> none;
    CHECK_THROWS_AS(rmse(none, none), EmptyInput);
}

TEST_CASE("rmse is positive unless predictions are exact") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> gauss;
    std::vector<double> pred(20), truth(20);
    for (int i = 0; i < 20; ++i) {
        truth[static_cast<std::size_t>(i)] = gauss(rng);
        pred[static_cast<std::size_t>(i)] = truth[static_cast<std::size_t>(i)];
    }
    pred[7] += 1e-9;
    CHECK(rmse(pred, truth) > 0.0);
}

TEST_CASE("smape examples and bounds") {
    const std::vector<double> v{1.0, 2.0};
    CHECK(smape(v, v) == 0.0);
    const std::vector<double> two{2}, zero{0};
    CHECK(smape(two, zero) == doctest::Approx(2.0));
    CHECK(smape(zero, zero) == 0.0);

    std::mt19937_64 rng(2);
    std::normal_distribution<double> gauss;
    std::vector<double> a(50), b(50);
    for (int i = 0; i < 50; ++i) {
        a[static_cast<std::size_t>(i)] = gauss(rng);
        b[static_cast<std::size_t>(i)] = gauss(rng);
    }
    const double forward = smape(a, b);
    CHECK(forward >= 0.0);
    CHECK(forward <= 2.0);
    CHECK(forward == doctest::Approx(smape(b, a)).epsilon(1e-15));
}

TEST_CASE("confusion counts every cell and sums to T") {
    const std::vector<char> pred{1, 1, 0, 0, 1};
    const std::vector<char> truth{1, 0, 1, 0, 1};
    const auto c = confusion(pred, truth);
    CHECK(c.tp == 2);
    CHECK(c.fp == 1);
    CHECK(c.fn == 1);
    CHECK(c.tn == 1);
    CHECK(c.total() == 5);
    CHECK_THROWS_AS(confusion(pred, std::vector<char>{1}), LengthMismatch);
}

TEST_CASE("pooled F1 follows the summed-counts formula") {
    ConfusionCounts c;
    c.tp = 2;
    c.fp = 1;
    c.fn = 1;
    CHECK(f1_pooled({&c, 1}) == doctest::Approx(2.0 / 3.0));

    ConfusionCounts perfect;
    perfect.tp = 10;
    perfect.tn = 5;
    CHECK(f1_pooled({&perfect, 1}) == 1.0);

    ConfusionCounts empty;
    empty.tn = 4;
    CHECK(f1_pooled({&empty, 1}) == 0.0);  // tp=fp=fn=0 defined as 0
}

TEST_CASE("pooling differs from averaging per-series F1") {
    ConfusionCounts a;  // perfect series: (tp,fp,fn) = (1,0,0)
    a.tp = 1;
    ConfusionCounts b;  // noisy series: (1,1,1)
    b.tp = 1;
    b.fp = 1;
    b.fn = 1;
    const std::vector<ConfusionCounts> counts{a, b};
    const double pooled = f1_pooled(counts);
    CHECK(pooled == doctest::Approx(2.0 / 3.0));

    const double f1_a = 1.0, f1_b = 0.5;
    CHECK((f1_a + f1_b) / 2.0 == doctest::Approx(0.75));
    CHECK(pooled != doctest::Approx(0.75));
}

TEST_CASE("pooled F1 is invariant under repartitioning the stream") {
    std::mt19937_64 rng(3);
    std::bernoulli_distribution flip(0.6);
    std::vector<char> pred(120), truth(120);
    for (int i = 0; i < 120; ++i) {
        pred[static_cast<std::size_t>(i)] = flip(rng) ? 1 : 0;
        truth[static_cast<std::size_t>(i)] = flip(rng) ? 1 : 0;
    }
    auto pooled_with_cuts = [&](const std::vector<std::size_t>& cuts) {
        std::vector<ConfusionCounts> counts;
        std::size_t start = 0;
        for (std::size_t cut : cuts) {
            counts.push_back(confusion({pred.data() + start, cut - start},
                                       {truth.data() + start, cut - start}));
            start = cut;
        }
        counts.push_back(confusion({pred.data() + start, pred.size() - start},
                                   {truth.data() + start, truth.size() - start}));
        return f1_pooled(counts);
    };
    const double whole = pooled_with_cuts({});
    CHECK(pooled_with_cuts({40, 80}) == doctest::Approx(whole).epsilon(1e-15));
    CHECK(pooled_with_cuts({1, 2, 3, 100}) == doctest::Approx(whole).epsilon(1e-15));
}

TEST_CASE("empirical_p and dataset_average") {
    const std::vector<char> s{1, 0, 1, 1};
    CHECK(empirical_p(s) == doctest::Approx(0.75));
    const std::vector<char> all(6, 1);
    CHECK(empirical_p(all) == 1.0);
    CHECK_THROWS_AS(empirical_p(std::vector<char>{}), EmptyInput);

    CHECK(dataset_average(std::vector<double>{0.2, 0.4}) == doctest::Approx(0.3));
    CHECK_THROWS_AS(dataset_average(std::vector<double>{}), EmptyInput);
}

TEST_SUITE_END();
