#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "fxmf/core.hpp"

namespace fxmf {

enum class TimestampFormat { automatic, epoch, iso8601 };

TimestampFormat parse_timestamp_format(std::string_view text);

/// Column mapping for delimited price files. Columns are matched by header
/// name, or by zero-based index when the name is all digits.
struct PriceFileFormat {
    char delimiter = ',';
    bool has_header = true;
    std::string timestamp_column = "timestamp";
    std::string price_column = "price";
    TimestampFormat timestamp_format = TimestampFormat::automatic;
    std::int64_t step = 60;
    std::string label = "A/B";
};

/// Parses epoch seconds ("1072990800", "1072990800.0") or ISO-8601
/// ("2004-01-02T21:00:00Z", "2004-01-02 21:00", optional +hh:mm offset).
std::int64_t parse_timestamp(std::string_view text, TimestampFormat format);

/// Reads one observation per row and places it on a uniform grid of
/// format.step seconds. The last row inside a grid bucket wins; empty buckets
/// repeat the previous value with gap_mask set.
TickSeries parse_price_file(const std::filesystem::path& path, const PriceFileFormat& format);
TickSeries parse_price_stream(std::istream& in, const PriceFileFormat& format,
                              const std::string& source_name = "<stream>");

/// Coarsens a series by an integer factor. Coarse sample j takes the fine value
/// at index j*factor and is gap-masked if any fine sample of its block is.
TickSeries resample(const TickSeries& series, std::size_t factor);

/// Time of week, weekday 0 = Sunday.
struct WeekTime {
    int weekday = 0;
    int hour = 0;
    int minute = 0;

    std::int64_t seconds_into_week() const { return weekday * 86400LL + hour * 3600LL + minute * 60LL; }
    std::string to_string() const;
};

/// Parses "Sun 21:00" style labels (English three-letter day names).
WeekTime parse_week_time(std::string_view text);

inline constexpr WeekTime kDefaultWeekStart{0, 21, 0};  // Sunday 21:00 UTC
inline constexpr WeekTime kDefaultWeekEnd{5, 22, 0};    // Friday 22:00 UTC

struct WeekSegmentation {
    std::size_t K = 0;
    std::size_t week_length = 0;
    /// Half-open [start, end) sample ranges, each week_length long.
    std::vector<std::pair<std::size_t, std::size_t>> index_ranges;
};

/// Seconds since Sunday 00:00 UTC of the week containing t.
std::int64_t seconds_into_week(std::int64_t epoch_seconds);

/// Fully covered weekly windows [week_start, week_end) on the grid. Throws
/// UsageError if the window length is not a multiple of the grid step or the
/// window start does not fall on grid points.
WeekSegmentation segment_weeks(const TimeGrid& grid, WeekTime week_start = kDefaultWeekStart,
                               WeekTime week_end = kDefaultWeekEnd);

inline WeekSegmentation segment_weeks(const TickSeries& series, WeekTime week_start = kDefaultWeekStart,
                                      WeekTime week_end = kDefaultWeekEnd) {
    return segment_weeks(series.grid(), week_start, week_end);
}

}  // namespace fxmf
