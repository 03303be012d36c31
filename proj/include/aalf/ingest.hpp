#pragma once

#include <iosfwd>
#include <utility>

#include "aalf/common.hpp"
#include "aalf/series.hpp"

namespace aalf {

struct MissingDataSection : std::runtime_error { using std::runtime_error::runtime_error; };
struct MalformedRow : std::runtime_error { using std::runtime_error::runtime_error; };
struct MissingValue : std::runtime_error { using std::runtime_error::runtime_error; };
struct DuplicateSeries : std::runtime_error { using std::runtime_error::runtime_error; };
struct NonNumericValue : std::runtime_error { using std::runtime_error::runtime_error; };
struct EmptyFile : std::runtime_error { using std::runtime_error::runtime_error; };
struct TooShort : std::runtime_error { using std::runtime_error::runtime_error; };
struct ZeroVariance : std::runtime_error { using std::runtime_error::runtime_error; };
struct InsufficientHistory : std::runtime_error { using std::runtime_error::runtime_error; };
struct UnknownFrequency : std::runtime_error { using std::runtime_error::runtime_error; };

enum class CsvLayout { long_form, wide_form };

/// Parse the line-oriented tsf archive subset: `#` comments, `@` headers,
/// a literal `@data` line, then `name:startTimestamp:v1,v2,...` records.
/// Series containing a `?` (missing value) are rejected.
Dataset parse_tsf(std::istream& in);
Dataset parse_tsf_text(std::string_view text);

/// Inverse of parse_tsf; parse(serialize(d)) == d.
std::string serialize_tsf(const Dataset& dataset);

/// long_form: headerless (series_name,value) rows in time order.
/// wide_form: header row of series names, one column per series.
Dataset parse_csv(std::istream& in, CsvLayout layout, std::string dataset_name = "csv");
Dataset parse_csv_text(std::string_view text, CsvLayout layout, std::string dataset_name = "csv");

/// 80/10/10 split with floored boundaries. Lengths below 10 are rejected.
SplitSpec split_series(std::size_t total_length);
SplitSpec split_series(const TimeSeries& series);

/// Split with custom fractions; every segment must come out non-empty.
SplitSpec split_series(std::size_t total_length, double train_fraction, double val_fraction);

/// Keep only series whose train, val and test segments are all non-constant.
/// A segment is constant iff max - min == 0; single-element segments count
/// as constant. Returns the surviving dataset and the discarded names.
std::pair<Dataset, std::vector<std::string>> filter_constant(const Dataset& dataset,
                                                             double train_fraction = 0.8,
                                                             double val_fraction = 0.1);

struct Standardization {
    double mean = 0.0;
    double std = 1.0;
};

/// Z-score the whole series using statistics of the train segment only.
std::pair<TimeSeries, Standardization> standardize(const TimeSeries& series, const SplitSpec& split);

/// One row per target timestep inside the segment. Lagged context may reach
/// back across the split boundary; targets never do. Train windows start at
/// the first timestep with L points of history.
WindowedSet make_windows(const TimeSeries& series, Segment segment, int lag, const SplitSpec& split);

/// Whole-series windowing: one row per timestep in [lag, length).
WindowedSet make_windows(const TimeSeries& series, int lag);

/// Half-open range of target timesteps make_windows would produce.
std::pair<std::size_t, std::size_t> target_range(const TimeSeries& series, Segment segment,
                                                 int lag, const SplitSpec& split);

/// Lag length by frequency: half_hourly -> 48, hourly -> 24, daily -> 14.
int default_lag(const Frequency& frequency);

}  // namespace aalf
