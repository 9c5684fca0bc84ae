#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fxmf/core.hpp"
#include "fxmf/ingest.hpp"
#include "fxmf/series_io.hpp"
#include "fxmf/rng.hpp"

using namespace fxmf;

namespace {

TickSeries ramp(std::size_t n, std::int64_t start = 0) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.01 * static_cast<double>(i);
    return TickSeries({start, 60, n}, v, std::vector<std::uint8_t>(n, 0), "EUR/USD");
}

TickSeries parse(const std::string& text, PriceFileFormat fmt = {}) {
    std::istringstream in(text);
    return parse_price_stream(in, fmt, "test.csv");
}

}  // namespace

TEST_CASE("alignment: identical grids") {
    std::vector<TimeGrid> g{{0, 60, 100}, {0, 60, 100}};
    const auto r = validate_alignment(std::span<const TimeGrid>(g));
    CHECK(r.aligned);
    CHECK_FALSE(r.mismatch_index.has_value());
}

TEST_CASE("alignment: shifted start is reported") {
    std::vector<TimeGrid> g{{0, 60, 100}, {60, 60, 100}};
    const auto r = validate_alignment(std::span<const TimeGrid>(g));
    CHECK_FALSE(r.aligned);
    CHECK(r.mismatch == GridField::start);
    CHECK(*r.mismatch_index == 1);
}

TEST_CASE("alignment: count mismatch on the third series") {
    std::vector<TimeGrid> g{{0, 60, 100}, {0, 60, 100}, {0, 60, 99}};
    const auto r = validate_alignment(std::span<const TimeGrid>(g));
    CHECK_FALSE(r.aligned);
    CHECK(r.mismatch == GridField::count);
    CHECK(*r.mismatch_index == 2);
}

TEST_CASE("alignment: works on series and rejects empty lists") {
    std::vector<TickSeries> s{ramp(10), ramp(10, 60)};
    CHECK(validate_alignment(std::span<const TickSeries>(s)).mismatch == GridField::start);
    CHECK_THROWS_AS(validate_alignment(std::span<const TimeGrid>()), UsageError);
}

TEST_CASE("time grid spacing") {
    const TimeGrid g{1000, 60, 50};
    for (std::size_t i = 0; i + 1 < g.count; ++i) CHECK(g.timestamp(i + 1) - g.timestamp(i) == g.step);
    CHECK_THROWS_AS((TimeGrid{0, 0, 10}.validate()), UsageError);
    CHECK_THROWS_AS((TimeGrid{0, 60, 1}.validate()), UsageError);
}

TEST_CASE("tick series rejects non-positive prices and length mismatch") {
    CHECK_THROWS((TickSeries({0, 60, 2}, {1.0, 0.0}, {0, 0}, "A/B")));
    CHECK_THROWS((TickSeries({0, 60, 3}, {1.0, 1.0}, {0, 0}, "A/B")));
}

TEST_CASE("pair labels and cyclic chains") {
    const auto p = parse_pair("EUR/USD");
    CHECK(p.base == "EUR");
    CHECK(p.quote == "USD");
    CHECK(chains_cyclically({"EUR/USD", "USD/JPY", "JPY/EUR"}));
    CHECK_FALSE(chains_cyclically({"EUR/USD", "JPY/USD", "JPY/EUR"}));
}

TEST_CASE("population moments") {
    const std::vector<double> x{0.0, 2.0};
    CHECK(mean(x) == 1.0);
    CHECK(population_stddev(x) == 1.0);
}

TEST_CASE("ingest: three consecutive rows") {
    const auto t = parse("timestamp,price\n0,1.0\n60,1.1\n120,1.2\n");
    CHECK(t.size() == 3);
    CHECK(t.gap_count() == 0);
    CHECK(t.values()[2] == 1.2);
    CHECK(t.grid().start_epoch == 0);
}

TEST_CASE("ingest: missing minutes are carried forward") {
    const auto t = parse("timestamp,price\n0,1.0\n180,1.3\n");
    REQUIRE(t.size() == 4);
    CHECK(t.values()[1] == 1.0);
    CHECK(t.values()[2] == 1.0);
    CHECK(t.gap_mask()[1] == 1);
    CHECK(t.gap_mask()[2] == 1);
    CHECK(t.gap_mask()[3] == 0);
    CHECK(t.gap_count() == 2);
}

TEST_CASE("ingest: bad rows name the line") {
    try {
        parse("timestamp,price\n0,1.0\n60,-1.2\n");
        FAIL("expected a data error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find(":3") != std::string::npos);
    }
    CHECK_THROWS_AS(parse("timestamp,price\n120,1.0\n60,1.1\n"), DataError);
    CHECK_THROWS_AS(parse(""), DataError);
    CHECK_THROWS_AS(parse("timestamp,price\n"), DataError);
}

TEST_CASE("ingest: ISO timestamps, custom delimiter and column index") {
    PriceFileFormat fmt;
    fmt.delimiter = ';';
    fmt.has_header = false;
    fmt.timestamp_column = "0";
    fmt.price_column = "2";
    const auto t = parse("2004-01-04T21:00:00Z;x;1.25\n2004-01-04 21:01;x;1.26\n", fmt);
    CHECK(t.grid().start_epoch == 1073250000);
    CHECK(t.size() == 2);
    CHECK(parse_timestamp("2004-01-04T23:00:00+02:00", TimestampFormat::iso8601) == 1073250000);
    CHECK(parse_timestamp("1073250000", TimestampFormat::automatic) == 1073250000);
}

TEST_CASE("ingest: the last row in a bucket wins") {
    const auto t = parse("timestamp,price\n0,1.0\n30,1.5\n60,2.0\n");
    CHECK(t.size() == 2);
    CHECK(t.values()[0] == 1.5);
}

TEST_CASE("segment weeks: Sunday 21:00 to Friday 22:00 over the full span") {
    // 1,703,520 minutes from Sunday 2004-01-04 21:00 UTC.
    const TimeGrid g{1073250000, 60, 1703520};
    const auto s = segment_weeks(g);
    CHECK(s.K == 169);
    CHECK(s.week_length == 7260);
    CHECK(s.K * s.week_length <= g.count);
    for (std::size_t b = 0; b < s.K; ++b) {
        CHECK(s.index_ranges[b].second - s.index_ranges[b].first == s.week_length);
        if (b > 0) CHECK(s.index_ranges[b].first >= s.index_ranges[b - 1].second);
    }
}

TEST_CASE("segment weeks: one exact window and one minute short") {
    CHECK(segment_weeks(TimeGrid{1073250000, 60, 7260}).K == 1);
    CHECK(segment_weeks(TimeGrid{1073250000, 60, 7259}).K == 0);
    // a leading partial week is dropped
    CHECK(segment_weeks(TimeGrid{1073250000 + 60, 60, 7260 + 7 * 1440}).K == 1);
}

TEST_CASE("segment weeks: window must be a multiple of the step") {
    CHECK_THROWS_AS(segment_weeks(TimeGrid{1073250000, 7, 100000}), UsageError);
    CHECK(parse_week_time("Fri 22:00").seconds_into_week() == 5 * 86400 + 22 * 3600);
    CHECK_THROWS(parse_week_time("Xyz 22:00"));
}

TEST_CASE("resample: coarse values and gap flags") {
    std::vector<double> v{1, 2, 3, 4, 5, 6, 7};
    std::vector<std::uint8_t> gap{0, 0, 0, 1, 0, 0, 0};
    const TickSeries t({0, 60, 7}, v, gap, "A/B");
    const auto r = resample(t, 3);
    REQUIRE(r.size() == 3);
    CHECK(r.grid().step == 180);
    CHECK(r.values()[1] == 4.0);
    CHECK(r.gap_mask()[1] == 1);
    CHECK(r.gap_mask()[0] == 0);
}

TEST_CASE("resample: gap fraction never decreases") {
    Rng rng(9);
    const std::size_t n = 5000;
    std::vector<double> v(n, 1.0);
    std::vector<std::uint8_t> gap(n);
    for (auto& g : gap) g = rng.uniform01() < 0.05 ? 1 : 0;
    const TickSeries t({0, 60, n}, v, gap, "A/B");
    const double f0 = static_cast<double>(t.gap_count()) / n;
    for (std::size_t factor : {2u, 5u, 10u, 60u}) {
        const auto r = resample(t, factor);
        CHECK(static_cast<double>(r.gap_count()) / r.size() >= f0);
    }
}

TEST_CASE("canonical series file round trip is bit-identical") {
    Rng rng(4);
    const std::size_t n = 500;
    std::vector<double> v(n);
    std::vector<std::uint8_t> gap(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = std::exp(rng.normal());
        gap[i] = i % 17 == 3;
    }
    const TickSeries t({1073250000, 60, n}, v, gap, "USD/JPY");
    std::stringstream ss;
    write_series(ss, t);
    const auto back = read_series(ss, "mem");
    REQUIRE(back.ticks.has_value());
    CHECK(back.ticks->grid() == t.grid());
    CHECK(back.ticks->values() == t.values());
    CHECK(back.ticks->gap_mask() == t.gap_mask());
    CHECK(back.ticks->label() == t.label());

    ReturnSeries::Meta meta;
    meta.dt_steps = 3;
    meta.kind = ReturnKind::residual;
    meta.normalized = true;
    meta.mean_removed = 1.0 / 3.0;
    meta.std_used = std::sqrt(2.0);
    meta.label = "residual";
    const ReturnSeries r({1073250000, 180, n}, v, gap, meta);
    std::stringstream rs;
    write_series(rs, r);
    const auto rb = read_series(rs, "mem");
    REQUIRE(rb.returns.has_value());
    CHECK(rb.returns->values() == r.values());
    CHECK(rb.returns->spans_gap() == r.spans_gap());
    CHECK(rb.returns->dt_steps() == 3);
    CHECK(rb.returns->kind() == ReturnKind::residual);
    CHECK(rb.returns->normalized());
    CHECK(rb.returns->mean_removed() == meta.mean_removed);
    CHECK(rb.returns->std_used() == meta.std_used);
}

TEST_CASE("re-ingesting an emitted series reproduces it") {
    const auto t = ramp(300, 1073250000);
    std::stringstream ss;
    write_series(ss, t);
    PriceFileFormat fmt;
    fmt.price_column = "value";
    fmt.label = t.label();
    std::istringstream in(ss.str());
    const auto again = parse_price_stream(in, fmt, "emitted");
    CHECK(again.grid() == t.grid());
    CHECK(again.values() == t.values());
}

TEST_CASE("series file errors carry the line") {
    std::istringstream in("timestamp,value,gap\n0,1.0,0\n60,abc,0\n");
    try {
        read_series(in, "bad.csv");
        FAIL("expected a data error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("bad.csv") != std::string::npos);
    }
}

TEST_CASE("format_double round-trips") {
    Rng rng(2);
    for (int i = 0; i < 1000; ++i) {
        const double x = rng.normal() * std::pow(10.0, rng.normal() * 20);
        CHECK(std::stod(format_double(x)) == x);
    }
}
