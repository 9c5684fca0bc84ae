#include "fxmf/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fxmf {

void TimeGrid::validate() const {
    if (step <= 0) throw UsageError("time grid step must be positive, got " + std::to_string(step));
    if (count < 2) throw UsageError("time grid needs at least 2 samples, got " + std::to_string(count));
}

TickSeries::TickSeries(TimeGrid grid, std::vector<double> values, std::vector<std::uint8_t> gap_mask,
                       std::string label)
    : grid_(grid), values_(std::move(values)), gap_mask_(std::move(gap_mask)), label_(std::move(label)) {
    grid_.validate();
    if (values_.size() != grid_.count || gap_mask_.size() != grid_.count)
        throw UsageError("tick series length mismatch: grid count " + std::to_string(grid_.count) +
                         ", values " + std::to_string(values_.size()) + ", gap mask " +
                         std::to_string(gap_mask_.size()));
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!(values_[i] > 0.0) || !std::isfinite(values_[i]))
            throw DataError("non-positive or non-finite price at sample " + std::to_string(i));
    }
}

std::size_t TickSeries::gap_count() const {
    return static_cast<std::size_t>(std::count_if(gap_mask_.begin(), gap_mask_.end(),
                                                  [](std::uint8_t g) { return g != 0; }));
}

std::string_view to_string(ReturnKind kind) {
    switch (kind) {
        case ReturnKind::plain: return "plain";
        case ReturnKind::residual: return "residual";
        case ReturnKind::volatility: return "volatility";
    }
    return "plain";
}

ReturnKind parse_return_kind(std::string_view text) {
    if (text == "plain") return ReturnKind::plain;
    if (text == "residual") return ReturnKind::residual;
    if (text == "volatility") return ReturnKind::volatility;
    throw UsageError("unknown return kind '" + std::string(text) + "'");
}

ReturnSeries::ReturnSeries(TimeGrid grid, std::vector<double> values, std::vector<std::uint8_t> spans_gap,
                           Meta meta)
    : grid_(grid), values_(std::move(values)), spans_gap_(std::move(spans_gap)), meta_(std::move(meta)) {
    if (grid_.step <= 0) throw UsageError("return grid step must be positive");
    if (grid_.count != values_.size())
        throw UsageError("return series length " + std::to_string(values_.size()) +
                         " does not match grid count " + std::to_string(grid_.count));
    if (spans_gap_.empty()) spans_gap_.assign(values_.size(), 0);
    if (spans_gap_.size() != values_.size()) throw UsageError("return series gap flags length mismatch");
    if (meta_.dt_steps <= 0) throw UsageError("dt_steps must be positive");
    if (meta_.kind == ReturnKind::volatility) {
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (values_[i] < 0.0)
                throw DataError("negative volatility value at sample " + std::to_string(i));
    }
}

PairCode parse_pair(std::string_view label) {
    const auto slash = label.find('/');
    if (slash == std::string_view::npos || slash == 0 || slash + 1 == label.size() ||
        label.find('/', slash + 1) != std::string_view::npos)
        throw UsageError("pair label must look like 'A/B', got '" + std::string(label) + "'");
    return {std::string(label.substr(0, slash)), std::string(label.substr(slash + 1))};
}

bool chains_cyclically(const std::array<std::string, 3>& labels) {
    std::array<PairCode, 3> codes;
    for (std::size_t k = 0; k < 3; ++k) codes[k] = parse_pair(labels[k]);
    for (std::size_t k = 0; k < 3; ++k)
        if (codes[k].quote != codes[(k + 1) % 3].base) return false;
    return true;
}

Triangle::Triangle(std::array<ReturnSeries, 3> legs) : legs_(std::move(legs)) {
    const std::array<TimeGrid, 3> grids{legs_[0].grid(), legs_[1].grid(), legs_[2].grid()};
    const auto report = validate_alignment(std::span<const TimeGrid>(grids));
    if (!report.aligned)
        throw AlignmentError("triangle leg " + std::to_string(*report.mismatch_index) +
                             " differs in " + std::string(to_string(report.mismatch)));
    for (const auto& leg : legs_)
        if (leg.dt_steps() != legs_[0].dt_steps()) throw AlignmentError("triangle legs use different dt");
    if (!chains_cyclically(pairs()))
        throw UsageError("pairs " + legs_[0].label() + ", " + legs_[1].label() + ", " + legs_[2].label() +
                         " do not chain as A/B, B/C, C/A");
}

std::array<std::string, 3> Triangle::pairs() const {
    return {legs_[0].label(), legs_[1].label(), legs_[2].label()};
}

std::string_view to_string(GridField field) {
    switch (field) {
        case GridField::none: return "none";
        case GridField::start: return "start";
        case GridField::step: return "step";
        case GridField::count: return "count";
    }
    return "none";
}

AlignmentReport validate_alignment(std::span<const TimeGrid> grids) {
    if (grids.empty()) throw UsageError("validate_alignment needs at least one series");
    const TimeGrid& ref = grids.front();
    for (std::size_t i = 1; i < grids.size(); ++i) {
        GridField field = GridField::none;
        if (grids[i].start_epoch != ref.start_epoch)
            field = GridField::start;
        else if (grids[i].step != ref.step)
            field = GridField::step;
        else if (grids[i].count != ref.count)
            field = GridField::count;
        if (field != GridField::none) return {false, i, field};
    }
    return {};
}

double mean(std::span<const double> x) {
    if (x.empty()) return 0.0;
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double population_stddev(std::span<const double> x, double m) {
    if (x.empty()) return 0.0;
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size()));
}

double population_stddev(std::span<const double> x) { return population_stddev(x, mean(x)); }

}  // namespace fxmf
