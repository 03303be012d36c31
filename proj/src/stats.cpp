#include "aalf/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "aalf/common.hpp"

namespace aalf {

namespace {

/// Ascending ranks starting at 1, ties replaced by the average of the
/// positions they occupy.
std::vector<double> rank_ascending(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

RankMatrix average_ranks(const Eigen::MatrixXd& losses) {
    if (losses.rows() < 1 || losses.cols() < 2)
        throw EmptyInput("average_ranks: need at least one row and two methods");

    RankMatrix rm;
    rm.ranks.resize(losses.rows(), losses.cols());
    std::vector<double> row(static_cast<std::size_t>(losses.cols()));
    for (Eigen::Index i = 0; i < losses.rows(); ++i) {
        for (Eigen::Index j = 0; j < losses.cols(); ++j) row[static_cast<std::size_t>(j)] = losses(i, j);
        const std::vector<double> r = rank_ascending(row);
        for (Eigen::Index j = 0; j < losses.cols(); ++j) rm.ranks(i, j) = r[static_cast<std::size_t>(j)];
    }
    rm.avg_rank = rm.ranks.colwise().mean();
    return rm;
}

FriedmanResult friedman_test(const RankMatrix& ranks) {
    const Eigen::Index n = ranks.ranks.rows();
    const Eigen::Index k = ranks.ranks.cols();
    if (n < 2 || k < 2) throw DegenerateInput("friedman_test: need n >= 2 rows and k >= 2 methods");

    const double kd = static_cast<double>(k);
    const double centre = (kd + 1.0) / 2.0;
    double sum_sq = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
        const double dev = ranks.avg_rank(j) - centre;
        sum_sq += dev * dev;
    }
    FriedmanResult out;
    out.statistic = 12.0 * static_cast<double>(n) / (kd * (kd + 1.0)) * sum_sq;
    const boost::math::chi_squared dist(kd - 1.0);
    out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
    return out;
}

PairwiseResult wilcoxon_signed_rank(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                    Alternative sided) {
    if (a.size() != b.size())
        throw LengthMismatch("wilcoxon_signed_rank: paired vectors differ in length");
    if (a.size() == 0) throw EmptyInput("wilcoxon_signed_rank: empty input");

    std::vector<double> abs_diff;
    std::vector<bool> positive;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double d = a(i) - b(i);
        if (d == 0.0) continue;
        abs_diff.push_back(std::abs(d));
        positive.push_back(d > 0.0);
    }
    const std::size_t n = abs_diff.size();
    if (n == 0) throw AllZeroDifferences("wilcoxon_signed_rank: all differences are zero");

    const std::vector<double> ranks = rank_ascending(abs_diff);
    double w_plus = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (positive[i]) w_plus += ranks[i];

    PairwiseResult out;
    out.statistic = w_plus;

    double p_geq = 0.0, p_leq = 0.0;
    if (n <= 25) {
        out.method = PairwiseResult::Method::exact;
        // Doubled ranks are integers even with averaged ties, so the null
        // distribution of 2*W+ is an exact subset-sum count.
        std::vector<long long> doubled(n);
        long long total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            doubled[i] = std::llround(2.0 * ranks[i]);
            total += doubled[i];
        }
        std::vector<double> ways(static_cast<std::size_t>(total) + 1, 0.0);
        ways[0] = 1.0;
        for (std::size_t i = 0; i < n; ++i)
            for (long long s = total; s >= doubled[i]; --s)
                ways[static_cast<std::size_t>(s)] += ways[static_cast<std::size_t>(s - doubled[i])];

        const double denom = std::ldexp(1.0, static_cast<int>(n));
        const long long w2 = std::llround(2.0 * w_plus);
        for (long long s = 0; s <= total; ++s) {
            if (s >= w2) p_geq += ways[static_cast<std::size_t>(s)];
            if (s <= w2) p_leq += ways[static_cast<std::size_t>(s)];
        }
        p_geq /= denom;
        p_leq /= denom;
    } else {
        out.method = PairwiseResult::Method::normal_approx;
        const double nd = static_cast<double>(n);
        const double mu = nd * (nd + 1.0) / 4.0;
        double tie_term = 0.0;
        std::vector<double> sorted = abs_diff;
        std::sort(sorted.begin(), sorted.end());
        std::size_t i = 0;
        while (i < sorted.size()) {
            std::size_t j = i;
            while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
            const double t = static_cast<double>(j - i + 1);
            tie_term += (t * t * t - t) / 48.0;
            i = j + 1;
        }
        const double sigma = std::sqrt(nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term);
        const boost::math::normal norm;
        p_geq = boost::math::cdf(boost::math::complement(norm, (w_plus - 0.5 - mu) / sigma));
        p_leq = boost::math::cdf(norm, (w_plus + 0.5 - mu) / sigma);
    }

    switch (sided) {
        case Alternative::greater: out.p_value = p_geq; break;
        case Alternative::less: out.p_value = p_leq; break;
        case Alternative::two_sided: out.p_value = std::min(1.0, 2.0 * std::min(p_geq, p_leq)); break;
    }
    return out;
}

CdResult cd_groups(const Eigen::MatrixXd& losses, double alpha, bool holm_correction) {
    const RankMatrix rm = average_ranks(losses);
    const int k = static_cast<int>(losses.cols());

    CdResult out;
    out.avg_rank = rm.avg_rank;

    std::vector<int> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (rm.avg_rank(a) != rm.avg_rank(b)) return rm.avg_rank(a) < rm.avg_rank(b);
        return a < b;
    });

    FriedmanResult friedman{0.0, 1.0};
    if (losses.rows() >= 2) friedman = friedman_test(rm);
    out.friedman_p = friedman.p_value;
    if (friedman.p_value >= alpha) {
        out.groups.push_back(order);
        return out;
    }

    struct Pair {
        int a, b;
        double p;
    };
    std::vector<Pair> pairs;
    for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b) {
            double p = 1.0;
            try {
                p = wilcoxon_signed_rank(losses.col(a), losses.col(b), Alternative::two_sided)
                        .p_value;
            } catch (const AllZeroDifferences&) {
                p = 1.0;
            }
            pairs.push_back({a, b, p});
        }

    if (holm_correction) {
        std::vector<std::size_t> idx(pairs.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::sort(idx.begin(), idx.end(),
                  [&](std::size_t x, std::size_t y) { return pairs[x].p < pairs[y].p; });
        double running = 0.0;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const double adjusted =
                std::min(1.0, static_cast<double>(idx.size() - i) * pairs[idx[i]].p);
            running = std::max(running, adjusted);
            pairs[idx[i]].p = running;
        }
    }

    std::vector<std::vector<bool>> reject(static_cast<std::size_t>(k),
                                          std::vector<bool>(static_cast<std::size_t>(k), false));
    for (const Pair& pr : pairs) {
        const bool r = pr.p < alpha;
        reject[static_cast<std::size_t>(pr.a)][static_cast<std::size_t>(pr.b)] = r;
        reject[static_cast<std::size_t>(pr.b)][static_cast<std::size_t>(pr.a)] = r;
    }

    // Maximal spans in rank order whose members are pairwise non-rejecting.
    std::vector<int> span_end(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        int j = i;
        while (j + 1 < k) {
            bool ok = true;
            for (int t = i; t <= j && ok; ++t)
                ok = !reject[static_cast<std::size_t>(order[static_cast<std::size_t>(t)])]
                            [static_cast<std::size_t>(order[static_cast<std::size_t>(j + 1)])];
            if (!ok) break;
            ++j;
        }
        span_end[static_cast<std::size_t>(i)] = j;
    }
    int covered = -1;
    for (int i = 0; i < k; ++i) {
        const int j = span_end[static_cast<std::size_t>(i)];
        if (j == i || j <= covered) continue;
        out.groups.emplace_back(order.begin() + i, order.begin() + j + 1);
        covered = j;
    }
    return out;
}

}  // namespace aalf
