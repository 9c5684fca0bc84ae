#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fxmf/core.hpp"

namespace fxmf {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Shortest decimal that round-trips to the same double.
std::string format_double(double x);

/// Canonical series file: '#'-prefixed "key: value" metadata lines, then the
/// header timestamp,value,gap and one row per sample (epoch seconds, LF).
void write_series(std::ostream& out, const TickSeries& series);
void write_series(std::ostream& out, const ReturnSeries& series);
void write_series(const std::filesystem::path& path, const TickSeries& series);
void write_series(const std::filesystem::path& path, const ReturnSeries& series);

/// Exactly one member is set; "kind: price" (or no kind) yields ticks.
struct SeriesFile {
    std::optional<TickSeries> ticks;
    std::optional<ReturnSeries> returns;
};

/// Throws DataError naming the path on unreadable or malformed input.
SeriesFile read_series(const std::filesystem::path& path);
SeriesFile read_series(std::istream& in, const std::string& source_name);

/// Plain CSV table preceded by '#' comment lines.
struct Table {
    std::vector<std::string> comments;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

void write_table(const std::filesystem::path& path, const Table& table);

}  // namespace fxmf
