#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fxmf/error.hpp"

namespace fxmf {

/// Uniform sampling grid: timestamp(i) = start_epoch + i * step, in UTC seconds.
struct TimeGrid {
    std::int64_t start_epoch = 0;
    std::int64_t step = 60;
    std::size_t count = 0;

    std::int64_t timestamp(std::size_t i) const {
        return start_epoch + static_cast<std::int64_t>(i) * step;
    }
    std::int64_t end_epoch() const { return timestamp(count); }

    /// Throws UsageError unless step > 0 and count >= 2.
    void validate() const;

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

/// Price samples x_A^B(t_i) on a uniform grid. gap_mask[i] != 0 marks a value
/// carried forward from the previous observation.
class TickSeries {
public:
    TickSeries(TimeGrid grid, std::vector<double> values, std::vector<std::uint8_t> gap_mask,
               std::string label);

    const TimeGrid& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<std::uint8_t>& gap_mask() const { return gap_mask_; }
    const std::string& label() const { return label_; }
    std::size_t size() const { return values_.size(); }
    std::size_t gap_count() const;

private:
    TimeGrid grid_;
    std::vector<double> values_;
    std::vector<std::uint8_t> gap_mask_;
    std::string label_;
};

enum class ReturnKind { plain, residual, volatility };

std::string_view to_string(ReturnKind kind);
ReturnKind parse_return_kind(std::string_view text);

/// Log returns at scale dt_steps. Sample i is stamped with the start of its
/// interval, G(t_i; dt) = ln x(t_i + dt) - ln x(t_i).
class ReturnSeries {
public:
    struct Meta {
        int dt_steps = 1;
        ReturnKind kind = ReturnKind::plain;
        bool normalized = false;
        double mean_removed = 0.0;
        double std_used = 1.0;
        std::string label;
    };

    /// spans_gap may be empty (no sample touches a carried-forward price).
    ReturnSeries(TimeGrid grid, std::vector<double> values, std::vector<std::uint8_t> spans_gap,
                 Meta meta);

    const TimeGrid& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<std::uint8_t>& spans_gap() const { return spans_gap_; }
    const Meta& meta() const { return meta_; }
    int dt_steps() const { return meta_.dt_steps; }
    ReturnKind kind() const { return meta_.kind; }
    bool normalized() const { return meta_.normalized; }
    double mean_removed() const { return meta_.mean_removed; }
    double std_used() const { return meta_.std_used; }
    const std::string& label() const { return meta_.label; }
    std::size_t size() const { return values_.size(); }

private:
    TimeGrid grid_;
    std::vector<double> values_;
    std::vector<std::uint8_t> spans_gap_;
    Meta meta_;
};

/// Currency pair "A/B" split into its two codes.
struct PairCode {
    std::string base;
    std::string quote;
};

PairCode parse_pair(std::string_view label);

/// Three return series whose pairs chain cyclically: A/B, B/C, C/A.
class Triangle {
public:
    explicit Triangle(std::array<ReturnSeries, 3> legs);

    const std::array<ReturnSeries, 3>& legs() const { return legs_; }
    std::array<std::string, 3> pairs() const;

private:
    std::array<ReturnSeries, 3> legs_;
};

/// True when three labels chain cyclically (second code of pair k equals the
/// first code of pair k+1 mod 3).
bool chains_cyclically(const std::array<std::string, 3>& labels);

enum class GridField { none, start, step, count };

std::string_view to_string(GridField field);

struct AlignmentReport {
    bool aligned = true;
    /// Index of the first series whose grid differs from series 0.
    std::optional<std::size_t> mismatch_index;
    GridField mismatch = GridField::none;
};

/// Compares every grid to the first one. Throws UsageError on an empty list.
AlignmentReport validate_alignment(std::span<const TimeGrid> grids);

template <typename Series>
AlignmentReport validate_alignment(std::span<const Series> series) {
    std::vector<TimeGrid> grids;
    grids.reserve(series.size());
    for (const auto& s : series) grids.push_back(s.grid());
    return validate_alignment(std::span<const TimeGrid>(grids));
}

// Population moments (divide by N).
double mean(std::span<const double> x);
double population_stddev(std::span<const double> x);
double population_stddev(std::span<const double> x, double mean);

}  // namespace fxmf
