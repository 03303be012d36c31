#include "aalf/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <sstream>

namespace aalf {

namespace {

std::vector<double> parse_value_list(std::string_view list, const std::string& series_name) {
    std::vector<double> values;
    for (std::string_view tok : split(list, ',')) {
        tok = trim(tok);
        if (tok == "?")
            throw MissingValue("series '" + series_name + "' contains a missing value");
        double v = 0;
        if (!try_parse_double(tok, v))
            throw MalformedRow("series '" + series_name + "': bad value token '" + std::string(tok) + "'");
        values.push_back(v);
    }
    return values;
}

void check_unique_name(const Dataset& d, const std::string& name) {
    if (d.find(name))
        throw DuplicateSeries("duplicate series name '" + name + "'");
}

}  // namespace

Dataset parse_tsf(std::istream& in) {
    Dataset dataset;
    dataset.name = "tsf";
    Frequency frequency{Frequency::Kind::other, "other"};
    bool saw_data = false;

    std::string line;
    while (std::getline(in, line)) {
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;

        if (!saw_data) {
            if (sv == "@data") {
                saw_data = true;
                continue;
            }
            if (sv.front() == '@') {
                auto space = sv.find_first_of(" \t");
                std::string_view key = sv.substr(0, space);
                std::string_view rest = space == std::string_view::npos ? std::string_view{} : trim(sv.substr(space + 1));
                if (key == "@relation") {
                    dataset.name = std::string(rest);
                } else if (key == "@frequency") {
                    frequency = Frequency::from_token(rest);
                } else if (key == "@horizon") {
                    double hv = 0;
                    if (!try_parse_double(rest, hv) || hv < 1)
                        throw MalformedRow("bad @horizon value '" + std::string(rest) + "'");
                    dataset.horizon = static_cast<int>(hv);
                } else {
                    dataset.extra_headers.emplace_back(sv);
                }
                continue;
            }
            throw MalformedRow("unexpected line before @data: '" + std::string(sv) + "'");
        }

        auto fields = split(sv, ':');
        if (fields.size() < 3)
            throw MalformedRow("record has fewer than 3 colon-separated fields: '" + std::string(sv) + "'");

        TimeSeries s;
        s.name = std::string(trim(fields.front()));
        // middle fields form the start timestamp; rejoin in case it contains ':'
        std::string ts;
        for (std::size_t i = 1; i + 1 < fields.size(); ++i) {
            if (i > 1) ts += ':';
            ts += std::string(trim(fields[i]));
        }
        if (!ts.empty()) s.start_timestamp = ts;
        s.values = parse_value_list(fields.back(), s.name);
        if (s.values.empty())
            throw MalformedRow("series '" + s.name + "' has no values");
        s.frequency = frequency;
        check_unique_name(dataset, s.name);
        dataset.series.push_back(std::move(s));
    }

    if (!saw_data)
        throw MissingDataSection("no @data line found");
    if (frequency.kind != Frequency::Kind::other)
        dataset.lag = default_lag(frequency);
    return dataset;
}

Dataset parse_tsf_text(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_tsf(in);
}

std::string serialize_tsf(const Dataset& dataset) {
    std::string out;
    out += "@relation " + dataset.name + "\n";
    std::string freq = dataset.series.empty() ? "other" : dataset.series.front().frequency.to_token();
    out += "@frequency " + freq + "\n";
    out += "@horizon " + std::to_string(dataset.horizon) + "\n";
    for (const auto& h : dataset.extra_headers) out += h + "\n";
    out += "@data\n";
    for (const auto& s : dataset.series) {
        out += s.name;
        out += ':';
        out += s.start_timestamp.value_or("");
        out += ':';
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            if (i) out += ',';
            out += format_double(s.values[i]);
        }
        out += '\n';
    }
    return out;
}

Dataset parse_csv(std::istream& in, CsvLayout layout, std::string dataset_name) {
    Dataset dataset;
    dataset.name = std::move(dataset_name);
    Frequency unknown{Frequency::Kind::other, "unknown"};

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        std::string_view sv = trim(line);
        if (!sv.empty()) lines.emplace_back(sv);
    }

    if (layout == CsvLayout::long_form) {
        if (lines.empty()) throw EmptyFile("long CSV has no rows");
        for (const auto& row : lines) {
            auto fields = split(row, ',');
            if (fields.size() != 2)
                throw MalformedRow("long CSV row needs exactly 2 fields: '" + row + "'");
            std::string name(trim(fields[0]));
            double v = 0;
            if (!try_parse_double(trim(fields[1]), v))
                throw NonNumericValue("non-numeric cell '" + std::string(trim(fields[1])) + "'");
            TimeSeries* s = nullptr;
            for (auto& existing : dataset.series)
                if (existing.name == name) s = &existing;
            if (!s) {
                dataset.series.push_back(TimeSeries{name, {}, unknown, std::nullopt});
                s = &dataset.series.back();
            }
            s->values.push_back(v);
        }
    } else {
        if (lines.size() < 2) throw EmptyFile("wide CSV needs a header and at least one row");
        auto header = split(lines.front(), ',');
        for (auto h : header) {
            std::string name(trim(h));
            if (name.empty()) throw MalformedRow("empty series name in wide CSV header");
            check_unique_name(dataset, name);
            dataset.series.push_back(TimeSeries{name, {}, unknown, std::nullopt});
        }
        for (std::size_t r = 1; r < lines.size(); ++r) {
            auto fields = split(lines[r], ',');
            if (fields.size() != header.size())
                throw MalformedRow("wide CSV row " + std::to_string(r) + " has " +
                                   std::to_string(fields.size()) + " fields, expected " +
                                   std::to_string(header.size()));
            for (std::size_t c = 0; c < fields.size(); ++c) {
                double v = 0;
                if (!try_parse_double(trim(fields[c]), v))
                    throw NonNumericValue("non-numeric cell '" + std::string(trim(fields[c])) + "'");
                dataset.series[c].values.push_back(v);
            }
        }
    }
    return dataset;
}

Dataset parse_csv_text(std::string_view text, CsvLayout layout, std::string dataset_name) {
    std::istringstream in{std::string(text)};
    return parse_csv(in, layout, std::move(dataset_name));
}

SplitSpec split_series(std::size_t total_length) { return split_series(total_length, 0.8, 0.1); }

SplitSpec split_series(const TimeSeries& series) { return split_series(series.length()); }

SplitSpec split_series(std::size_t total_length, double train_fraction, double val_fraction) {
    if (total_length < 10)
        throw TooShort("series of length " + std::to_string(total_length) + " cannot be split (minimum 10)");
    if (train_fraction <= 0 || val_fraction <= 0 || train_fraction + val_fraction >= 1)
        throw std::invalid_argument("split fractions must be positive and sum below 1");
    SplitSpec spec;
    spec.total = total_length;
    spec.train_end =
        static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(total_length)));
    spec.val_end = static_cast<std::size_t>(
        std::floor((train_fraction + val_fraction) * static_cast<double>(total_length)));
    if (spec.train_end == 0 || spec.val_end <= spec.train_end || spec.val_end >= spec.total)
        throw TooShort("series of length " + std::to_string(total_length) +
                       " leaves an empty segment under the requested fractions");
    return spec;
}

namespace {

bool segment_constant(const std::vector<double>& v, std::size_t begin, std::size_t end) {
    if (end - begin <= 1) return true;
    auto [mn, mx] = std::minmax_element(v.begin() + static_cast<std::ptrdiff_t>(begin),
                                        v.begin() + static_cast<std::ptrdiff_t>(end));
    return *mx - *mn == 0.0;
}

}  // namespace

std::pair<Dataset, std::vector<std::string>> filter_constant(const Dataset& dataset,
                                                              double train_fraction,
                                                              double val_fraction) {
    Dataset kept = dataset;
    kept.series.clear();
    std::vector<std::string> discarded;
    for (const auto& s : dataset.series) {
        SplitSpec split = split_series(s.length(), train_fraction, val_fraction);
        bool constant = segment_constant(s.values, 0, split.train_end) ||
                        segment_constant(s.values, split.train_end, split.val_end) ||
                        segment_constant(s.values, split.val_end, split.total);
        if (constant)
            discarded.push_back(s.name);
        else
            kept.series.push_back(s);
    }
    return {std::move(kept), std::move(discarded)};
}

std::pair<TimeSeries, Standardization> standardize(const TimeSeries& series, const SplitSpec& split) {
    if (split.train_end == 0 || split.train_end > series.length())
        throw TooShort("split does not fit series '" + series.name + "'");
    double mean = 0;
    for (std::size_t i = 0; i < split.train_end; ++i) mean += series.values[i];
    mean /= static_cast<double>(split.train_end);
    double var = 0;
    for (std::size_t i = 0; i < split.train_end; ++i) {
        double d = series.values[i] - mean;
        var += d * d;
    }
    var /= static_cast<double>(split.train_end);
    double std_dev = std::sqrt(var);
    if (std_dev == 0.0)
        throw ZeroVariance("train segment of series '" + series.name + "' is constant");

    TimeSeries out = series;
    for (auto& v : out.values) v = (v - mean) / std_dev;
    return {std::move(out), Standardization{mean, std_dev}};
}

namespace {

WindowedSet windows_for_range(const TimeSeries& series, std::size_t first_target,
                              std::size_t end_target, int lag) {
    if (lag <= 0) throw std::invalid_argument("lag must be positive");
    const auto L = static_cast<std::size_t>(lag);
    if (first_target < L || first_target >= end_target)
        throw InsufficientHistory("series '" + series.name + "': no window has " +
                                  std::to_string(lag) + " points of history");
    const std::size_t n = end_target - first_target;
    WindowedSet ws;
    ws.inputs.resize(static_cast<Eigen::Index>(n), lag);
    ws.targets.resize(static_cast<Eigen::Index>(n));
    ws.origin_indices.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t t = first_target + i;
        for (std::size_t j = 0; j < L; ++j)
            ws.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = series.values[t - L + j];
        ws.targets(static_cast<Eigen::Index>(i)) = series.values[t];
        ws.origin_indices[i] = t;
    }
    return ws;
}

}  // namespace

WindowedSet make_windows(const TimeSeries& series, Segment segment, int lag, const SplitSpec& split) {
    const auto [begin, end] = target_range(series, segment, lag, split);
    return windows_for_range(series, begin, end, lag);
}

WindowedSet make_windows(const TimeSeries& series, int lag) {
    return windows_for_range(series, static_cast<std::size_t>(std::max(lag, 0)), series.length(), lag);
}

std::pair<std::size_t, std::size_t> target_range(const TimeSeries& series, Segment segment,
                                                 int lag, const SplitSpec& split) {
    if (split.total != series.length())
        throw LengthMismatch("split total does not match series length");
    std::size_t begin = 0, end = 0;
    switch (segment) {
        case Segment::train: begin = 0; end = split.train_end; break;
        case Segment::val: begin = split.train_end; end = split.val_end; break;
        case Segment::test: begin = split.val_end; end = split.total; break;
    }
    const auto L = static_cast<std::size_t>(std::max(lag, 0));
    if (segment == Segment::train) {
        // the first L train timesteps have no full history and are not targets
        begin = std::max(begin, L);
    } else if (begin < L) {
        throw InsufficientHistory("series '" + series.name + "': segment starts before " +
                                  std::to_string(lag) + " points of history exist");
    }
    return {begin, end};
}

int default_lag(const Frequency& frequency) {
    switch (frequency.kind) {
        case Frequency::Kind::half_hourly: return 48;
        case Frequency::Kind::hourly: return 24;
        case Frequency::Kind::daily: return 14;
        default:
            throw UnknownFrequency("no default lag for frequency '" + frequency.token + "'");
    }
}

}  // namespace aalf
