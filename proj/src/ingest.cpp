#include "fxmf/ingest.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

namespace fxmf {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (std::isspace(static_cast<unsigned char>(s.front())) || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (std::isspace(static_cast<unsigned char>(s.back())) || s.back() == '"')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto next = line.find(delim, pos);
        out.push_back(trim(line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos)));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end;
}

int parse_fixed(std::string_view s, std::size_t pos, std::size_t len, std::string_view whole) {
    int v = 0;
    if (pos + len > s.size() || !parse_number(s.substr(pos, len), v))
        throw DataError("malformed ISO-8601 timestamp '" + std::string(whole) + "'");
    return v;
}

std::int64_t parse_iso8601(std::string_view s) {
    // YYYY-MM-DD[T| ]HH:MM[:SS[.fff]][Z|+hh:mm|-hh:mm]
    if (s.size() < 10 || s[4] != '-' || s[7] != '-') throw DataError("malformed ISO-8601 timestamp '" + std::string(s) + "'");
    using namespace std::chrono;
    const int y = parse_fixed(s, 0, 4, s);
    const int mo = parse_fixed(s, 5, 2, s);
    const int d = parse_fixed(s, 8, 2, s);
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) throw DataError("invalid calendar date in '" + std::string(s) + "'");
    std::int64_t secs = sys_days{ymd}.time_since_epoch().count() * 86400LL;
    std::size_t pos = 10;
    if (pos < s.size() && (s[pos] == 'T' || s[pos] == ' ')) {
        const int hh = parse_fixed(s, pos + 1, 2, s);
        if (pos + 3 >= s.size() || s[pos + 3] != ':') throw DataError("malformed ISO-8601 time in '" + std::string(s) + "'");
        const int mm = parse_fixed(s, pos + 4, 2, s);
        pos += 6;
        int ss = 0;
        if (pos < s.size() && s[pos] == ':') {
            ss = parse_fixed(s, pos + 1, 2, s);
            pos += 3;
            if (pos < s.size() && s[pos] == '.') {
                ++pos;
                while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
            }
        }
        if (hh > 23 || mm > 59 || ss > 60) throw DataError("invalid time of day in '" + std::string(s) + "'");
        secs += hh * 3600LL + mm * 60LL + ss;
    }
    if (pos < s.size()) {
        if (s[pos] == 'Z' && pos + 1 == s.size()) return secs;
        if ((s[pos] == '+' || s[pos] == '-') && pos + 6 == s.size() && s[pos + 3] == ':') {
            const int oh = parse_fixed(s, pos + 1, 2, s);
            const int om = parse_fixed(s, pos + 4, 2, s);
            const std::int64_t offset = oh * 3600LL + om * 60LL;
            return s[pos] == '+' ? secs - offset : secs + offset;
        }
        throw DataError("unrecognised ISO-8601 suffix in '" + std::string(s) + "'");
    }
    return secs;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

std::int64_t floor_mod(std::int64_t a, std::int64_t b) { return a - floor_div(a, b) * b; }

std::size_t resolve_column(const std::vector<std::string_view>& header, const std::string& name,
                           const std::string& source) {
    if (all_digits(name)) return static_cast<std::size_t>(std::stoul(name));
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw DataError(source + ": column '" + name + "' not found in header");
}

constexpr std::array<std::string_view, 7> kDayNames{"Sun", "Mon", "Tue", "Wed", "Thu", "Fri", "Sat"};
constexpr std::int64_t kSecondsPerWeek = 7 * 86400;
// 1970-01-01 was a Thursday; the first Sunday 00:00 UTC is three days later.
constexpr std::int64_t kFirstSundayEpoch = 3 * 86400;

}  // namespace

TimestampFormat parse_timestamp_format(std::string_view text) {
    if (text == "auto") return TimestampFormat::automatic;
    if (text == "epoch") return TimestampFormat::epoch;
    if (text == "iso8601" || text == "iso") return TimestampFormat::iso8601;
    throw UsageError("unknown timestamp format '" + std::string(text) + "' (expected auto, epoch, iso8601)");
}

std::int64_t parse_timestamp(std::string_view text, TimestampFormat format) {
    text = trim(text);
    if (format != TimestampFormat::iso8601) {
        std::int64_t iv = 0;
        if (parse_number(text, iv)) return iv;
        double dv = 0;
        if (parse_number(text, dv) && std::isfinite(dv)) return static_cast<std::int64_t>(std::floor(dv));
        if (format == TimestampFormat::epoch) throw DataError("malformed epoch timestamp '" + std::string(text) + "'");
    }
    return parse_iso8601(text);
}

TickSeries parse_price_stream(std::istream& in, const PriceFileFormat& format, const std::string& source) {
    if (format.step <= 0) throw UsageError("grid step must be positive");
    std::string line;
    std::size_t line_no = 0;
    std::size_t ts_col = 0, px_col = 1;
    if (format.has_header) {
        bool got = false;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (trim(line).empty() || line[0] == '#') continue;
            const auto header = split(line, format.delimiter);
            ts_col = resolve_column(header, format.timestamp_column, source);
            px_col = resolve_column(header, format.price_column, source);
            got = true;
            break;
        }
        if (!got) throw DataError(source + ": empty file");
    } else {
        if (!all_digits(format.timestamp_column) || !all_digits(format.price_column))
            throw UsageError("columns must be given as indices when the file has no header");
        ts_col = std::stoul(format.timestamp_column);
        px_col = std::stoul(format.price_column);
    }

    std::vector<std::int64_t> times;
    std::vector<double> prices;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty() || line[0] == '#') continue;
        const auto fields = split(line, format.delimiter);
        const auto where = source + ":" + std::to_string(line_no);
        if (fields.size() <= std::max(ts_col, px_col)) throw DataError(where + ": too few columns");
        std::int64_t t = 0;
        try {
            t = parse_timestamp(fields[ts_col], format.timestamp_format);
        } catch (const DataError& e) {
            throw DataError(where + ": " + e.what());
        }
        double p = 0;
        if (!parse_number(fields[px_col], p)) throw DataError(where + ": malformed price '" + std::string(fields[px_col]) + "'");
        if (!(p > 0.0) || !std::isfinite(p)) throw DataError(where + ": non-positive price " + std::string(fields[px_col]));
        if (!times.empty() && t < times.back()) throw DataError(where + ": timestamp decreases");
        times.push_back(t);
        prices.push_back(p);
    }
    if (times.empty()) throw DataError(source + ": no data rows");

    const std::int64_t step = format.step;
    const std::int64_t start = floor_div(times.front(), step) * step;
    const auto count = static_cast<std::size_t>((floor_div(times.back(), step) * step - start) / step + 1);
    if (count < 2) throw DataError(source + ": data span fewer than 2 grid samples");

    std::vector<double> values(count, 0.0);
    std::vector<std::uint8_t> gap(count, 1);
    for (std::size_t r = 0; r < times.size(); ++r) {
        const auto b = static_cast<std::size_t>((floor_div(times[r], step) * step - start) / step);
        values[b] = prices[r];
        gap[b] = 0;
    }
    for (std::size_t i = 1; i < count; ++i)
        if (gap[i]) values[i] = values[i - 1];
    return TickSeries(TimeGrid{start, step, count}, std::move(values), std::move(gap), format.label);
}

TickSeries parse_price_file(const std::filesystem::path& path, const PriceFileFormat& format) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return parse_price_stream(in, format, path.string());
}

TickSeries resample(const TickSeries& series, std::size_t factor) {
    if (factor == 0) throw UsageError("resample factor must be positive");
    const std::size_t n = series.size();
    const std::size_t coarse = (n + factor - 1) / factor;
    std::vector<double> values(coarse);
    std::vector<std::uint8_t> gap(coarse, 0);
    for (std::size_t j = 0; j < coarse; ++j) {
        values[j] = series.values()[j * factor];
        for (std::size_t i = j * factor; i < std::min(n, (j + 1) * factor); ++i)
            if (series.gap_mask()[i]) gap[j] = 1;
    }
    TimeGrid grid{series.grid().start_epoch, series.grid().step * static_cast<std::int64_t>(factor), coarse};
    return TickSeries(grid, std::move(values), std::move(gap), series.label());
}

std::string WeekTime::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%s %02d:%02d", kDayNames[static_cast<std::size_t>(weekday)].data(), hour, minute);
    return buf;
}

WeekTime parse_week_time(std::string_view text) {
    text = trim(text);
    const auto bad = [&] { return UsageError("week time must look like 'Sun 21:00', got '" + std::string(text) + "'"); };
    if (text.size() < 9 || text[3] != ' ' || text[6] != ':') throw bad();
    WeekTime wt;
    const auto day = text.substr(0, 3);
    const auto it = std::find(kDayNames.begin(), kDayNames.end(), day);
    if (it == kDayNames.end()) throw bad();
    wt.weekday = static_cast<int>(it - kDayNames.begin());
    if (!parse_number(text.substr(4, 2), wt.hour) || !parse_number(text.substr(7), wt.minute)) throw bad();
    if (wt.hour > 23 || wt.minute > 59) throw bad();
    return wt;
}

std::int64_t seconds_into_week(std::int64_t epoch_seconds) {
    return floor_mod(epoch_seconds - kFirstSundayEpoch, kSecondsPerWeek);
}

WeekSegmentation segment_weeks(const TimeGrid& grid, WeekTime week_start, WeekTime week_end) {
    if (grid.step <= 0) throw UsageError("grid step must be positive");
    std::int64_t duration = floor_mod(week_end.seconds_into_week() - week_start.seconds_into_week(), kSecondsPerWeek);
    if (duration == 0) duration = kSecondsPerWeek;
    if (duration % grid.step != 0)
        throw UsageError("week window of " + std::to_string(duration) + " s is not a multiple of the grid step " +
                         std::to_string(grid.step) + " s");
    WeekSegmentation seg;
    seg.week_length = static_cast<std::size_t>(duration / grid.step);

    // First window start at or after the grid start.
    const std::int64_t lead = floor_mod(week_start.seconds_into_week() - seconds_into_week(grid.start_epoch), kSecondsPerWeek);
    if (lead % grid.step != 0) throw UsageError("week start " + week_start.to_string() + " does not fall on the grid");
    for (std::int64_t t = grid.start_epoch + lead;; t += kSecondsPerWeek) {
        const auto first = static_cast<std::size_t>((t - grid.start_epoch) / grid.step);
        if (first + seg.week_length > grid.count) break;
        seg.index_ranges.emplace_back(first, first + seg.week_length);
    }
    seg.K = seg.index_ranges.size();
    return seg;
}

}  // namespace fxmf
