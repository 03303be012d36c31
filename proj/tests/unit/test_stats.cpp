#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "aalf/common.hpp"
#include "aalf/stats.hpp"
#include "test_oracles.hpp"

using namespace aalf;

TEST_SUITE_BEGIN("stats");

TEST_CASE("average_ranks orders losses ascending") {
    Eigen::MatrixXd losses(1, 3);
    losses << 0.1, 0.3, 0.2;
    const auto rm = average_ranks(losses);
    CHECK(rm.ranks(0, 0) == 1.0);
    CHECK(rm.ranks(0, 1) == 3.0);
    CHECK(rm.ranks(0, 2) == 2.0);
}

TEST_CASE("average_ranks averages ties") {
    Eigen::MatrixXd losses(1, 3);
    losses << 0.5, 0.5, 1.0;
    const auto rm = average_ranks(losses);
    CHECK(rm.ranks(0, 0) == 1.5);
    CHECK(rm.ranks(0, 1) == 1.5);
    CHECK(rm.ranks(0, 2) == 3.0);
}

TEST_CASE("identical columns rank at the midpoint") {
    Eigen::MatrixXd losses = Eigen::MatrixXd::Constant(4, 5, 2.0);
    const auto rm = average_ranks(losses);
    for (int j = 0; j < 5; ++j) CHECK(rm.avg_rank(j) == doctest::Approx(3.0));
}

TEST_CASE("rank rows always sum to k(k+1)/2") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> value(0, 4);  // force plenty of ties
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 3 + trial % 5, k = 2 + trial % 6;
        Eigen::MatrixXd losses(n, k);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < k; ++j) losses(i, j) = value(rng);
        const auto rm = average_ranks(losses);
        for (int i = 0; i < n; ++i)
            CHECK(rm.ranks.row(i).sum() == doctest::Approx(k * (k + 1) / 2.0).epsilon(1e-12));
    }
}

TEST_CASE("average_ranks validates shape") {
    CHECK_THROWS_AS(average_ranks(Eigen::MatrixXd(0, 3)), EmptyInput);
    CHECK_THROWS_AS(average_ranks(Eigen::MatrixXd(3, 1)), EmptyInput);
}

TEST_CASE("friedman on identical methods is exactly null") {
    const auto rm = average_ranks(Eigen::MatrixXd::Constant(5, 3, 1.0));
    const auto result = friedman_test(rm);
    CHECK(result.statistic == doctest::Approx(0.0));
    CHECK(result.p_value == doctest::Approx(1.0));
}

TEST_CASE("friedman statistic matches the closed form") {
    // one method always best, the other two tied behind it
    Eigen::MatrixXd losses(10, 3);
    for (int i = 0; i < 10; ++i) {
        losses(i, 0) = 1.0;
        losses(i, 1) = 2.0;
        losses(i, 2) = 2.0;
    }
    const auto rm = average_ranks(losses);
    CHECK(rm.avg_rank(0) == doctest::Approx(1.0));
    CHECK(rm.avg_rank(1) == doctest::Approx(2.5));
    CHECK(rm.avg_rank(2) == doctest::Approx(2.5));

    const auto result = friedman_test(rm);
    const int n = 10, k = 3;
    double sum = 0.0;
    for (int j = 0; j < k; ++j) sum += std::pow(rm.avg_rank(j) - (k + 1) / 2.0, 2);
    const double expected = 12.0 * n / (k * (k + 1.0)) * sum;
    CHECK(result.statistic == doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(15.0));
    CHECK(result.p_value < 0.001);
    CHECK(result.p_value > 0.0);
}

TEST_CASE("friedman rejects degenerate shapes") {
    CHECK_THROWS_AS(friedman_test(average_ranks(Eigen::MatrixXd::Constant(1, 3, 1.0))),
                    DegenerateInput);
}

TEST_CASE("wilcoxon worked example: consistent positive differences") {
    Eigen::VectorXd a(3), b(3);
    a << 1, 2, 3;
    b << 0, 0, 0;
    const auto res = wilcoxon_signed_rank(a, b, Alternative::greater);
    CHECK(res.statistic == doctest::Approx(6.0));
    CHECK(res.p_value == doctest::Approx(1.0 / 8.0));
    CHECK(res.method == PairwiseResult::Method::exact);
}

TEST_CASE("wilcoxon rejects all-zero differences and length mismatch") {
    Eigen::VectorXd a(3);
    a << 1, 2, 3;
    CHECK_THROWS_AS(wilcoxon_signed_rank(a, a, Alternative::two_sided), AllZeroDifferences);
    Eigen::VectorXd shorter(2);
    shorter << 1, 2;
    CHECK_THROWS_AS(wilcoxon_signed_rank(a, shorter, Alternative::two_sided), LengthMismatch);
}

TEST_CASE("wilcoxon is antisymmetric under swapping the samples") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> gauss;
    Eigen::VectorXd a(10), b(10);
    for (int i = 0; i < 10; ++i) {
        a(i) = gauss(rng);
        b(i) = gauss(rng);
    }
    const auto ab = wilcoxon_signed_rank(a, b, Alternative::two_sided);
    const auto ba = wilcoxon_signed_rank(b, a, Alternative::two_sided);
    CHECK(ab.p_value == doctest::Approx(ba.p_value).epsilon(1e-12));
    const auto ag = wilcoxon_signed_rank(a, b, Alternative::greater);
    const auto bl = wilcoxon_signed_rank(b, a, Alternative::less);
    CHECK(ag.p_value == doctest::Approx(bl.p_value).epsilon(1e-12));
}

TEST_CASE("exact wilcoxon matches full enumeration for n <= 12") {
    std::mt19937_64 rng(29);
    std::uniform_int_distribution<int> size(1, 12);
    std::uniform_int_distribution<int> grid(-4, 4);  // small grid forces ties and zeros
    int tested = 0;
    for (int trial = 0; trial < 120; ++trial) {
        const int n = size(rng);
        Eigen::VectorXd a(n), b(n);
        std::vector<double> diffs(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            a(i) = grid(rng);
            b(i) = grid(rng);
            diffs[static_cast<std::size_t>(i)] = a(i) - b(i);
        }
        if (std::all_of(diffs.begin(), diffs.end(), [](double d) { return d == 0.0; })) continue;
        const auto expected = testoracle::wilcoxon_enumerate(diffs);

        const auto greater = wilcoxon_signed_rank(a, b, Alternative::greater);
        const auto less = wilcoxon_signed_rank(a, b, Alternative::less);
        const auto two = wilcoxon_signed_rank(a, b, Alternative::two_sided);
        REQUIRE(greater.method == PairwiseResult::Method::exact);
        CHECK(greater.statistic == doctest::Approx(expected.w_plus).epsilon(1e-12));
        CHECK(greater.p_value == doctest::Approx(expected.p_greater).epsilon(1e-12));
        CHECK(less.p_value == doctest::Approx(expected.p_less).epsilon(1e-12));
        CHECK(two.p_value == doctest::Approx(expected.p_two_sided).epsilon(1e-12));
        ++tested;
    }
    CHECK(tested > 100);
}

TEST_CASE("crossover to the normal approximation happens above n = 25") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> gauss;
    Eigen::VectorXd a25(25), b25(25), a26(26), b26(26);
    for (int i = 0; i < 25; ++i) {
        a25(i) = gauss(rng);
        b25(i) = gauss(rng);
    }
    for (int i = 0; i < 26; ++i) {
        a26(i) = gauss(rng);
        b26(i) = gauss(rng);
    }
    CHECK(wilcoxon_signed_rank(a25, b25, Alternative::two_sided).method ==
          PairwiseResult::Method::exact);
    CHECK(wilcoxon_signed_rank(a26, b26, Alternative::two_sided).method ==
          PairwiseResult::Method::normal_approx);
}

TEST_CASE("normal approximation is close to enumeration on moderate n") {
    // n = 26 forced into the approximation; enumeration at n = 18 by padding
    // with zeros that get dropped
    std::mt19937_64 rng(37);
    std::normal_distribution<double> gauss;
    const int n = 18;
    Eigen::VectorXd a(n + 8), b(n + 8);
    std::vector<double> diffs;
    for (int i = 0; i < n; ++i) {
        const double d = gauss(rng) + 0.3;
        a(i) = d;
        b(i) = 0.0;
        diffs.push_back(d);
    }
    for (int i = n; i < n + 8; ++i) {
        a(i) = 0.0;
        b(i) = 0.0;
    }
    // effective n is 18 after dropping zeros, so the library is exact here;
    // compare that exact value to the test-side enumeration as a sanity check
    const auto res = wilcoxon_signed_rank(a, b, Alternative::two_sided);
    const auto expected = testoracle::wilcoxon_enumerate(diffs);
    CHECK(res.method == PairwiseResult::Method::exact);
    CHECK(res.p_value == doctest::Approx(expected.p_two_sided).epsilon(1e-12));
}

TEST_CASE("cd_groups separates clearly different methods") {
    Eigen::MatrixXd losses(8, 2);
    for (int i = 0; i < 8; ++i) {
        losses(i, 0) = 0.1 + 0.01 * i;
        losses(i, 1) = 1.1 + 0.01 * i;
    }
    const auto cd = cd_groups(losses, 0.05);
    CHECK(cd.friedman_p < 0.05);
    CHECK(cd.groups.empty());
    CHECK(cd.avg_rank(0) == doctest::Approx(1.0));
    CHECK(cd.avg_rank(1) == doctest::Approx(2.0));
}

TEST_CASE("cd_groups joins identical methods into one group") {
    Eigen::MatrixXd losses(6, 2);
    for (int i = 0; i < 6; ++i) {
        losses(i, 0) = 0.5 + 0.1 * i;
        losses(i, 1) = 0.5 + 0.1 * i;
    }
    const auto cd = cd_groups(losses, 0.05);
    REQUIRE(cd.groups.size() == 1);
    CHECK(cd.groups[0].size() == 2);
}

TEST_CASE("cd_groups produces overlapping bars on the constructed fixture") {
    // verified externally: pairwise two-sided p-values are
    // p(1,2) = 0.1514, p(2,3) = 0.1099, p(1,3) = 0.0005; Friedman p = 0.0169
    Eigen::MatrixXd losses(12, 3);
    losses << 0.09, 1.58, 1.09,
              0.01, 1.45, 1.01,
              0.24, -0.06, 1.24,
              0.03, -0.33, 1.03,
              0.09, -0.48, 1.09,
              0.25, 0.53, 1.25,
              0.22, 1.27, 1.22,
              0.13, 0.71, 1.13,
              0.23, 1.83, 1.23,
              0.08, -0.33, 1.08,
              0.13, 1.25, 1.13,
              0.24, -0.2, 1.24;

    const auto a_vs_b = wilcoxon_signed_rank(losses.col(0), losses.col(1), Alternative::two_sided);
    const auto b_vs_c = wilcoxon_signed_rank(losses.col(1), losses.col(2), Alternative::two_sided);
    const auto a_vs_c = wilcoxon_signed_rank(losses.col(0), losses.col(2), Alternative::two_sided);
    CHECK(a_vs_b.p_value > 0.05);
    CHECK(b_vs_c.p_value > 0.05);
    CHECK(a_vs_c.p_value < 0.05);

    const auto cd = cd_groups(losses, 0.05);
    CHECK(cd.friedman_p < 0.05);
    REQUIRE(cd.groups.size() == 2);
    CHECK(cd.groups[0] == std::vector<int>{0, 1});
    CHECK(cd.groups[1] == std::vector<int>{1, 2});
}

TEST_CASE("cd_groups collapses to one group when the omnibus test fails") {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> gauss(0.0, 1e-3);
    Eigen::MatrixXd losses(6, 3);
    for (int i = 0; i < 6; ++i) {
        const double base = gauss(rng);
        for (int j = 0; j < 3; ++j) losses(i, j) = base + gauss(rng);
    }
    const auto cd = cd_groups(losses, 1e-9);  // impossible alpha: gate cannot pass
    REQUIRE(cd.groups.size() == 1);
    auto members = cd.groups[0];
    std::sort(members.begin(), members.end());
    CHECK(members == std::vector<int>{0, 1, 2});
}

TEST_CASE("cd_groups is invariant under column permutation up to relabeling") {
    Eigen::MatrixXd losses(12, 3);
    losses << 0.09, 1.58, 1.09, 0.01, 1.45, 1.01, 0.24, -0.06, 1.24, 0.03, -0.33, 1.03, 0.09,
        -0.48, 1.09, 0.25, 0.53, 1.25, 0.22, 1.27, 1.22, 0.13, 0.71, 1.13, 0.23, 1.83, 1.23, 0.08,
        -0.33, 1.08, 0.13, 1.25, 1.13, 0.24, -0.2, 1.24;
    Eigen::MatrixXd permuted(12, 3);
    permuted.col(0) = losses.col(2);
    permuted.col(1) = losses.col(0);
    permuted.col(2) = losses.col(1);

    const auto original = cd_groups(losses, 0.05);
    const auto shuffled = cd_groups(permuted, 0.05);
    REQUIRE(original.groups.size() == shuffled.groups.size());
    const int relabel[3] = {1, 2, 0};  // original column j appears as permuted column relabel[j]
    for (std::size_t g = 0; g < original.groups.size(); ++g) {
        std::vector<int> mapped;
        for (int m : original.groups[g]) mapped.push_back(relabel[m]);
        std::sort(mapped.begin(), mapped.end());
        auto other = shuffled.groups[g];
        std::sort(other.begin(), other.end());
        CHECK(mapped == other);
    }
}

TEST_SUITE_END();
