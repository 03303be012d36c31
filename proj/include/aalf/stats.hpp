#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace aalf {

struct DegenerateInput : std::runtime_error { using std::runtime_error::runtime_error; };
struct AllZeroDifferences : std::runtime_error { using std::runtime_error::runtime_error; };

/// Per-row ranks of a series x methods loss matrix. Each row holds the
/// ranks 1..k with ties replaced by their average, so rows sum to k(k+1)/2.
struct RankMatrix {
    Eigen::MatrixXd ranks;
    Eigen::VectorXd avg_rank;
};

struct FriedmanResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

enum class Alternative : char { greater, less, two_sided };

struct PairwiseResult {
    enum class Method : char { exact, normal_approx };

    double statistic = 0.0;
    double p_value = 1.0;
    Method method = Method::exact;
};

/// Lower loss = better = rank 1.
RankMatrix average_ranks(const Eigen::MatrixXd& losses);

/// Chi-square approximation with k-1 degrees of freedom.
FriedmanResult friedman_test(const RankMatrix& ranks);

/// Signed-rank test on the paired differences a - b; zero differences are
/// dropped. The statistic is the positive-rank sum W+. Exact distribution
/// for effective n <= 25, normal approximation with tie-corrected variance
/// and continuity correction above that.
PairwiseResult wilcoxon_signed_rank(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                    Alternative sided);

/// Critical-difference grouping: methods sorted by average rank, joined
/// into maximal rank-contiguous groups whose members are pairwise
/// indistinguishable at the given level.
struct CdResult {
    Eigen::VectorXd avg_rank;
    std::vector<std::vector<int>> groups;  // method indices, rank order
    double friedman_p = 1.0;
};

CdResult cd_groups(const Eigen::MatrixXd& losses, double alpha = 0.05,
                   bool holm_correction = false);

}  // namespace aalf
