#include "aalf/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "aalf/metrics.hpp"

namespace aalf {

void SeriesPredictions::check_aligned() const {
    if (f_pred.size() != truth.size() || g_pred.size() != truth.size())
        throw LengthMismatch("prediction vectors for series '" + series + "' are not aligned");
    if (!origin_indices.empty() && origin_indices.size() != static_cast<std::size_t>(truth.size()))
        throw LengthMismatch("origin indices for series '" + series + "' are not aligned");
}

LossDiffSeries loss_diff(const SeriesPredictions& table) {
    table.check_aligned();
    LossDiffSeries out;
    out.ell = (table.f_pred - table.truth).array().square() -
              (table.g_pred - table.truth).array().square();
    return out;
}

SelectionVector optimal_selection(const LossDiffSeries& ell, long B) {
    const long T = ell.ell.size();
    if (B < 0 || B > T)
        throw BOutOfRange("B = " + std::to_string(B) + " outside [0, " + std::to_string(T) + "]");

    SelectionVector sel;
    sel.required = B;
    sel.s.assign(static_cast<std::size_t>(T), 0);
    long count = 0;
    for (long t = 0; t < T; ++t) {
        if (ell.ell(t) <= 0.0) {
            sel.s[static_cast<std::size_t>(t)] = 1;
            ++count;
        }
    }
    if (count < B) {
        // the constraint binds: top up with the cheapest positive entries,
        // stopping at exactly B since every extra one raises the loss
        std::vector<long> positive;
        positive.reserve(static_cast<std::size_t>(T - count));
        for (long t = 0; t < T; ++t)
            if (!sel.s[static_cast<std::size_t>(t)]) positive.push_back(t);
        std::stable_sort(positive.begin(), positive.end(),
                         [&](long a, long b) { return ell.ell(a) < ell.ell(b); });
        for (long i = 0; i < B - count; ++i)
            sel.s[static_cast<std::size_t>(positive[static_cast<std::size_t>(i)])] = 1;
        count = B;
    }
    sel.achieved_count = count;
    return sel;
}

double selection_loss(const SeriesPredictions& table, const SelectionVector& s) {
    table.check_aligned();
    if (static_cast<Eigen::Index>(s.size()) != table.size())
        throw LengthMismatch("selection length does not match table");
    double loss = 0;
    for (Eigen::Index t = 0; t < table.size(); ++t) {
        double pred = s.s[static_cast<std::size_t>(t)] ? table.f_pred(t) : table.g_pred(t);
        double d = table.truth(t) - pred;
        loss += d * d;
    }
    return loss;
}

Eigen::VectorXd mixed_prediction(const SeriesPredictions& table, const SelectionVector& s) {
    table.check_aligned();
    if (static_cast<Eigen::Index>(s.size()) != table.size())
        throw LengthMismatch("selection length does not match table");
    Eigen::VectorXd out(table.size());
    for (Eigen::Index t = 0; t < table.size(); ++t)
        out(t) = s.s[static_cast<std::size_t>(t)] ? table.f_pred(t) : table.g_pred(t);
    return out;
}

FloorCurve floor_sweep(const SeriesPredictions& table, std::span<const double> p_values) {
    table.check_aligned();
    const long T = table.size();
    if (T == 0)
        throw EmptySegment("cannot sweep an empty segment");
    LossDiffSeries ell = loss_diff(table);

    FloorCurve curve;
    curve.points.reserve(p_values.size());
    for (double p : p_values) {
        if (!(p > 0.0) || p > 1.0)
            throw BOutOfRange("p = " + format_double(p) + " outside (0, 1]");
        long B = static_cast<long>(std::ceil(p * static_cast<double>(T)));
        SelectionVector s = optimal_selection(ell, B);
        Eigen::VectorXd mixed = mixed_prediction(table, s);
        FloorPoint pt;
        pt.p = p;
        pt.rmse = rmse({mixed.data(), static_cast<std::size_t>(T)},
                       {table.truth.data(), static_cast<std::size_t>(T)});
        pt.achieved_p = static_cast<double>(s.achieved_count) / static_cast<double>(T);
        curve.points.push_back(pt);
    }
    return curve;
}

std::vector<double> sample_p_values(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n));
    while (static_cast<int>(out.size()) < n) {
        double p = unit(rng);
        if (p > 0.0) out.push_back(p);  // open interval
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace aalf
