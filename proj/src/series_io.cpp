#include "fxmf/series_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "fxmf/error.hpp"

namespace fxmf {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

void write_rows(std::ostream& out, const TimeGrid& grid, const std::vector<double>& values,
                const std::vector<std::uint8_t>& gaps) {
    out << "timestamp,value,gap\n";
    std::string line;
    for (std::size_t i = 0; i < values.size(); ++i) {
        line.clear();
        line += std::to_string(grid.timestamp(i));
        line += ',';
        line += format_double(values[i]);
        line += gaps.empty() || !gaps[i] ? ",0\n" : ",1\n";
        out << line;
    }
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    return out;
}

double parse_double(std::string_view text, const std::string& where) {
    text = trim(text);
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw DataError(where + ": cannot parse number '" + std::string(text) + "'");
    return v;
}

std::int64_t parse_int(std::string_view text, const std::string& where) {
    text = trim(text);
    std::int64_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw DataError(where + ": cannot parse integer '" + std::string(text) + "'");
    return v;
}

bool parse_bool(const std::string& v) { return v == "true" || v == "1"; }

}  // namespace

std::string format_double(double x) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

void write_series(std::ostream& out, const TickSeries& s) {
    out << "# fxmf " << kToolVersion << '\n';
    out << "# label: " << s.label() << '\n';
    out << "# kind: price\n";
    out << "# step: " << s.grid().step << '\n';
    write_rows(out, s.grid(), s.values(), s.gap_mask());
}

void write_series(std::ostream& out, const ReturnSeries& s) {
    out << "# fxmf " << kToolVersion << '\n';
    out << "# label: " << s.label() << '\n';
    out << "# kind: " << to_string(s.kind()) << '\n';
    out << "# step: " << s.grid().step << '\n';
    out << "# dt: " << s.dt_steps() << '\n';
    out << "# normalized: " << (s.normalized() ? "true" : "false") << '\n';
    out << "# mean_removed: " << format_double(s.mean_removed()) << '\n';
    out << "# std_used: " << format_double(s.std_used()) << '\n';
    write_rows(out, s.grid(), s.values(), s.spans_gap());
}

void write_series(const std::filesystem::path& path, const TickSeries& series) {
    auto out = open_out(path);
    write_series(out, series);
}

void write_series(const std::filesystem::path& path, const ReturnSeries& series) {
    auto out = open_out(path);
    write_series(out, series);
}

SeriesFile read_series(std::istream& in, const std::string& source) {
    std::map<std::string, std::string> meta;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::vector<std::int64_t> ts;
    std::vector<double> values;
    std::vector<std::uint8_t> gaps;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = source + ":" + std::to_string(line_no);
        std::string_view v = trim(line);
        if (v.empty()) continue;
        if (v.front() == '#') {
            v.remove_prefix(1);
            const auto colon = v.find(':');
            if (colon != std::string_view::npos)
                meta[std::string(trim(v.substr(0, colon)))] = std::string(trim(v.substr(colon + 1)));
            continue;
        }
        if (!header_seen) {
            if (v != "timestamp,value,gap") throw DataError(where + ": expected header 'timestamp,value,gap'");
            header_seen = true;
            continue;
        }
        const auto c1 = v.find(',');
        const auto c2 = c1 == std::string_view::npos ? c1 : v.find(',', c1 + 1);
        if (c2 == std::string_view::npos) throw DataError(where + ": expected three columns");
        ts.push_back(parse_int(v.substr(0, c1), where));
        values.push_back(parse_double(v.substr(c1 + 1, c2 - c1 - 1), where));
        gaps.push_back(parse_int(v.substr(c2 + 1), where) != 0 ? 1 : 0);
    }
    if (!header_seen || ts.empty()) throw DataError(source + ": no data rows");
    std::int64_t step = meta.count("step") ? parse_int(meta["step"], source) : (ts.size() > 1 ? ts[1] - ts[0] : 60);
    if (step <= 0) throw DataError(source + ": non-positive step");
    for (std::size_t i = 1; i < ts.size(); ++i)
        if (ts[i] - ts[i - 1] != step)
            throw DataError(source + ": row " + std::to_string(i + 1) + " breaks the uniform " + std::to_string(step) +
                            " s grid");
    TimeGrid grid{ts[0], step, ts.size()};
    const std::string label = meta.count("label") ? meta["label"] : "";
    const std::string kind = meta.count("kind") ? meta["kind"] : "price";
    SeriesFile f;
    try {
        if (kind == "price") {
            f.ticks.emplace(grid, std::move(values), std::move(gaps), label.empty() ? "A/B" : label);
        } else {
            ReturnSeries::Meta m;
            m.kind = parse_return_kind(kind);
            m.label = label;
            if (meta.count("dt")) m.dt_steps = static_cast<int>(parse_int(meta["dt"], source));
            if (meta.count("normalized")) m.normalized = parse_bool(meta["normalized"]);
            if (meta.count("mean_removed")) m.mean_removed = parse_double(meta["mean_removed"], source);
            if (meta.count("std_used")) m.std_used = parse_double(meta["std_used"], source);
            f.returns.emplace(grid, std::move(values), std::move(gaps), std::move(m));
        }
    } catch (const UsageError& e) {
        throw DataError(source + ": " + e.what());
    }
    return f;
}

SeriesFile read_series(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return read_series(in, path.string());
}

void write_table(const std::filesystem::path& path, const Table& t) {
    auto out = open_out(path);
    for (const auto& c : t.comments) out << "# " << c << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
    out << '\n';
    std::string line;
    for (const auto& row : t.rows) {
        line.clear();
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) line += ',';
            line += format_double(row[i]);
        }
        line += '\n';
        out << line;
    }
}

}  // namespace fxmf
