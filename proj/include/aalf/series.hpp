#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aalf {

/// Sampling frequency of a series. Tokens outside the three supported
/// kinds are kept verbatim so files round-trip.
struct Frequency {
    enum class Kind { half_hourly, hourly, daily, other };

    Kind kind = Kind::other;
    std::string token;  // original token, meaningful for Kind::other

    static Frequency from_token(std::string_view t) {
        if (t == "half_hourly") return {Kind::half_hourly, "half_hourly"};
        if (t == "hourly") return {Kind::hourly, "hourly"};
        if (t == "daily") return {Kind::daily, "daily"};
        return {Kind::other, std::string(t)};
    }
    std::string to_token() const { return token; }
    bool operator==(const Frequency&) const = default;
};

struct TimeSeries {
    std::string name;
    std::vector<double> values;
    Frequency frequency;
    std::optional<std::string> start_timestamp;

    std::size_t length() const { return values.size(); }
    bool operator==(const TimeSeries&) const = default;
};

struct Dataset {
    std::string name;
    std::vector<TimeSeries> series;
    int lag = 0;  // 0 means not resolvable from the frequency; set explicitly
    int horizon = 1;
    std::vector<std::string> extra_headers;  // unrecognized @ lines, kept for round-trips

    const TimeSeries* find(std::string_view series_name) const {
        for (const auto& s : series)
            if (s.name == series_name) return &s;
        return nullptr;
    }
    bool operator==(const Dataset&) const = default;
};

/// Contiguous train/val/test boundaries over one series:
/// train = [0, train_end), val = [train_end, val_end), test = [val_end, total).
struct SplitSpec {
    std::size_t train_end = 0;
    std::size_t val_end = 0;
    std::size_t total = 0;

    bool operator==(const SplitSpec&) const = default;
};

enum class Segment { train, val, test };

inline std::string_view segment_name(Segment s) {
    switch (s) {
        case Segment::train: return "train";
        case Segment::val: return "val";
        default: return "test";
    }
}

inline std::optional<Segment> segment_from_name(std::string_view name) {
    if (name == "train") return Segment::train;
    if (name == "val") return Segment::val;
    if (name == "test") return Segment::test;
    return std::nullopt;
}

/// Aligned (lagged window, next value) pairs. Row i of inputs holds
/// values[origin_indices[i]-L .. origin_indices[i]-1] and targets[i] is
/// values[origin_indices[i]].
struct WindowedSet {
    Eigen::MatrixXd inputs;   // n x L
    Eigen::VectorXd targets;  // n
    std::vector<std::size_t> origin_indices;

    Eigen::Index size() const { return inputs.rows(); }
    Eigen::Index lag() const { return inputs.cols(); }
};

}  // namespace aalf
