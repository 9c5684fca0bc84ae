#include "fxmf/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include "fxmf/epps.hpp"
#include "fxmf/error.hpp"
#include "fxmf/ingest.hpp"
#include "fxmf/mfdfa.hpp"
#include "fxmf/qgaussian.hpp"
#include "fxmf/returns.hpp"
#include "fxmf/rmt.hpp"
#include "fxmf/series_io.hpp"
#include "fxmf/synth.hpp"
#include "fxmf/temporal.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace fxmf::cli {
namespace {

constexpr int kSchemaVersion = 1;

struct IngestParams {
    std::string input;
    std::string delimiter = ",";
    bool header = true;
    std::string timestamp_column = "timestamp";
    std::string price_column = "price";
    std::string timestamp_format = "auto";
    std::int64_t step = 60;
    std::string label = "A/B";
    std::size_t resample = 1;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(IngestParams, input, delimiter, header, timestamp_column, price_column,
                                                timestamp_format, step, label, resample)

struct ReturnsParams {
    std::string input;
    std::vector<std::string> triangle;
    int dt = 1;
    bool overlap = true;
    bool normalize = false;
    bool volatility = false;
    bool detrend_daily = false;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ReturnsParams, input, triangle, dt, overlap, normalize, volatility,
                                                detrend_daily)

struct DistfitParams {
    std::string input;
    int dt = 1;
    bool exclude_gaps = false;
    double range_lo = 0.0;
    double range_hi = 0.0;  // 0 = unbounded
    double q_lo = 1.0;
    double q_hi = 2.0;
    double q_step = 0.01;
    std::size_t max_points = 200;
    std::size_t min_rank = 5;
    int max_iterations = 200;
    double gradient_tolerance = 1e-8;
    bool refine_q = true;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(DistfitParams, input, dt, exclude_gaps, range_lo, range_hi, q_lo, q_hi,
                                                q_step, max_points, min_rank, max_iterations, gradient_tolerance,
                                                refine_q)

struct AutocorrParams {
    std::string input;
    int dt = 1;
    std::size_t max_lag = 1000;
    bool volatility = false;
    bool detrend_daily = true;
    std::size_t fit_lo = 0;  // 0 = no power-law fit
    std::size_t fit_hi = 0;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(AutocorrParams, input, dt, max_lag, volatility, detrend_daily, fit_lo,
                                                fit_hi)

struct RmtParams {
    std::string input;
    std::string week_start = "Sun 21:00";
    std::string week_end = "Fri 22:00";
    double threshold = 10.0;
    std::size_t modes = 3;
    std::size_t bins = 50;
    std::size_t mp_points = 200;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(RmtParams, input, week_start, week_end, threshold, modes, bins,
                                                mp_points)

struct MfdfaParams {
    std::string input;
    int dt = 1;
    std::vector<double> r;
    std::size_t n_min = 16;
    std::size_t n_max = 0;
    std::size_t n_count = 24;
    int order = 2;
    std::size_t window_lo = 16;
    std::size_t window_hi = 0;
    bool shuffle = true;
    std::uint64_t shuffle_seed = 1;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(MfdfaParams, input, dt, r, n_min, n_max, n_count, order, window_lo,
                                                window_hi, shuffle, shuffle_seed)

struct EppsParams {
    std::vector<std::string> triple;
    bool triangle = false;
    std::vector<int> dt = default_dt_grid();
    double fraction = 0.95;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(EppsParams, triple, triangle, dt, fraction)

struct SynthParams {
    std::string kind = "iid_gaussian";
    std::uint64_t seed = 1;
    std::size_t length = 1 << 17;
    double sigma = 1.0;
    double phi = 0.5;
    double a = 0.6;
    int m = 16;
    std::string conservation = "exact";
    double mass_spread = 0.3;
    double q = 1.5;
    double qg_sigma = 1.0;
    double decay = 0.4;
    double vol_of_vol = 0.5;
    int lag = 8;
    double coupling = 1.0;
    double follower_noise = 0.5;
    bool independent_companion = true;
    double return_scale = 1e-4;
    bool symmetric_sections = false;
    std::array<std::string, 3> currencies{"EUR", "USD", "JPY"};
    double spike_rate = 1e-4;
    double spike_scale = 2e4;
    double spike_tail_index = 1.5;
    std::int64_t start_epoch = 1073250000;
    std::int64_t step = 60;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SynthParams, kind, seed, length, sigma, phi, a, m, conservation,
                                                mass_spread, q, qg_sigma, decay, vol_of_vol, lag, coupling,
                                                follower_noise, independent_companion, return_scale,
                                                symmetric_sections, currencies, spike_rate, spike_scale,
                                                spike_tail_index, start_epoch, step)

struct PipelineParams {
    std::vector<std::string> inputs;  // empty: generate from synth
    SynthParams synth = [] {
        SynthParams s;
        s.kind = "triangle_consistent_rates";
        return s;
    }();
    DistfitParams distfit;
    AutocorrParams autocorr;
    MfdfaParams mfdfa;
    RmtParams rmt;
    EppsParams epps = [] {
        EppsParams e;
        e.triangle = true;
        return e;
    }();
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(PipelineParams, inputs, synth, distfit, autocorr, mfdfa, rmt, epps)

// ---------------------------------------------------------------------------

struct Output {
    fs::path dir;
    std::vector<std::string> header;

    fs::path file(const std::string& name) const { return dir / name; }
    void table(const std::string& name, std::vector<std::string> columns, std::vector<std::vector<double>> rows) const {
        write_table(file(name), Table{header, std::move(columns), std::move(rows)});
    }
};

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

Output make_output(const std::string& dir, const std::string& command, const json& params) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory '" + dir + "': " + ec.message());
    Output o{dir, {"fxmf " + std::string(kToolVersion), "command: " + command, "params: " + params.dump()}};
    write_json(o.file("resolved_config.json"),
               json{{"schema_version", kSchemaVersion}, {"command", command}, {"tool_version", kToolVersion},
                    {"params", params}});
    return o;
}

Output sub_output(const Output& parent, const std::string& name) {
    Output o = parent;
    o.dir = parent.dir / name;
    std::error_code ec;
    fs::create_directories(o.dir, ec);
    if (ec) throw DataError("cannot create output directory '" + o.dir.string() + "'");
    return o;
}

json json_number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

ReturnSeries to_returns(const SeriesFile& f, int dt) {
    if (f.ticks) return log_returns(*f.ticks, dt, true);
    return *f.returns;
}

const TickSeries& require_ticks(const SeriesFile& f, const std::string& what) {
    if (!f.ticks) throw UsageError(what + " needs a price series, got a return series");
    return *f.ticks;
}

std::vector<double> unflagged(const ReturnSeries& r) {
    std::vector<double> out;
    for (std::size_t i = 0; i < r.size(); ++i)
        if (!r.spans_gap()[i]) out.push_back(r.values()[i]);
    return out;
}

// --- analyses ---------------------------------------------------------------

json do_distfit(const DistfitParams& p, const SeriesFile& in, const Output& out) {
    ReturnSeries r = to_returns(in, p.dt);
    const auto raw = p.exclude_gaps ? unflagged(r) : r.values();
    const double m = mean(raw);
    const double sd = population_stddev(raw, m);
    if (!(sd > 0.0)) throw DegenerateInputError("distfit: return series has zero variance");
    std::vector<double> g(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) g[i] = (raw[i] - m) / sd;

    FitOptions opt;
    opt.range_lo = p.range_lo;
    opt.range_hi = p.range_hi > 0.0 ? p.range_hi : std::numeric_limits<double>::infinity();
    opt.q_lo = p.q_lo;
    opt.q_hi = p.q_hi;
    opt.q_step = p.q_step;
    opt.max_points = p.max_points;
    opt.min_rank = p.min_rank;
    opt.max_iterations = p.max_iterations;
    opt.gradient_tolerance = p.gradient_tolerance;
    opt.refine_q = p.refine_q;
    const EmpiricalCdf ecdf(g);
    const auto result = fit(ecdf, opt);

    std::vector<std::vector<double>> rows;
    for (const auto* w : {&result.left, &result.right}) {
        const double sign = w->wing == Wing::left ? -1.0 : 1.0;
        for (const auto& pt : ecdf.wing_points(w->wing, opt.range_lo, opt.range_hi, opt.max_points, opt.min_rank)) {
            const double model = cdf_wing(pt.x, w->params, w->wing);
            rows.push_back({sign, pt.x, std::fabs(pt.x), pt.probability, model, std::log(std::fabs(pt.x)),
                            std::log(pt.probability), std::log(model)});
        }
    }
    out.table("distfit_points.csv",
              {"wing", "x", "abs_x", "p_empirical", "p_model", "ln_abs_x", "ln_p_empirical", "ln_p_model"},
              std::move(rows));
    const auto wing_json = [](const WingFit& w) {
        return json{{"q", w.params.q},
                    {"B", w.params.B},
                    {"mu", w.params.mu},
                    {"sigma", w.params.sigma()},
                    {"objective", w.objective},
                    {"n_points", w.n_points},
                    {"iterations", w.iterations},
                    {"converged", w.converged}};
    };
    return json{{"n_samples", g.size()},
                {"mean_removed", m},
                {"std_used", sd},
                {"fit_range", {opt.range_lo, json_number(opt.range_hi)}},
                {"left", wing_json(result.left)},
                {"right", wing_json(result.right)}};
}

json do_autocorr(const AutocorrParams& p, const SeriesFile& in, const Output& out) {
    ReturnSeries r = to_returns(in, p.dt);
    std::string analysed = "returns";
    if (p.volatility) {
        ReturnSeries base = r;
        if (base.kind() == ReturnKind::plain) {
            base = volatility(normalize(base));
        } else if (base.kind() != ReturnKind::volatility) {
            throw UsageError("--volatility needs plain returns or a volatility series");
        }
        analysed = "volatility";
        if (p.detrend_daily && 86400 % base.grid().step == 0) {
            base = remove_daily_trend(base, daily_volatility_profile(base));
            analysed = "daily-detrended volatility";
        }
        r = base;
    }
    const auto ac = autocorrelation(r, p.max_lag);
    std::vector<std::vector<double>> rows;
    const double minutes = static_cast<double>(r.grid().step) / 60.0;
    for (std::size_t i = 0; i < ac.lags.size(); ++i) {
        const double lag = static_cast<double>(ac.lags[i]);
        rows.push_back({lag, lag * minutes, ac.c[i], ac.confidence_95[i], static_cast<double>(ac.n_eff[i]),
                        i > 0 ? std::log(lag) : std::nan(""), ac.c[i] > 0.0 ? std::log(ac.c[i]) : std::nan("")});
    }
    out.table("autocorr.csv", {"lag", "lag_minutes", "c", "band_95", "n_eff", "ln_lag", "ln_c"}, std::move(rows));
    std::size_t inside = 0;
    for (std::size_t i = 1; i < ac.c.size(); ++i)
        if (std::fabs(ac.c[i]) <= ac.confidence_95[i]) ++inside;
    json s{{"series", analysed},
           {"n_samples", r.size()},
           {"max_lag", p.max_lag},
           {"c1", ac.c.size() > 1 ? ac.c[1] : 0.0},
           {"fraction_inside_band", ac.c.size() > 1 ? static_cast<double>(inside) / (ac.c.size() - 1) : 1.0},
           {"band", "white-noise 1.96/sqrt(n - tau)"}};
    if (p.fit_lo > 0 && p.fit_hi > p.fit_lo) {
        const auto f = fit_power_law(ac, {p.fit_lo, p.fit_hi});
        s["power_law"] = json{{"exponent", f.exponent},
                              {"amplitude", f.amplitude},
                              {"window", {f.fit_window.first, f.fit_window.second}},
                              {"r_squared", f.r_squared}};
    }
    return s;
}

json do_rmt(const RmtParams& p, const ReturnSeries& returns, const Output& out) {
    const auto seg = segment_weeks(returns.grid(), parse_week_time(p.week_start), parse_week_time(p.week_end));
    if (seg.K < 2) throw DataError("rmt: need at least two complete weekly windows, found " + std::to_string(seg.K));
    const auto M = build_segment_matrix(returns, seg);
    const auto C = correlation_matrix(M);
    const auto dec = diagonalize(C);
    const auto dist = element_distribution(C, p.bins);

    std::vector<std::vector<double>> ev;
    for (Eigen::Index k = 0; k < dec.eigenvalues.size(); ++k) ev.push_back({static_cast<double>(k + 1), dec.eigenvalues[k]});
    out.table("eigenvalues.csv", {"k", "lambda"}, std::move(ev));

    json s{{"K", M.K()}, {"T_K", M.T_K()}, {"Q", M.Q()}, {"trace", C.trace()}};
    s["element_gaussian"] = json{{"mean", dist.mean}, {"sigma", dist.sigma}, {"n", dist.n_elements}};
    std::vector<std::vector<double>> hist;
    for (std::size_t b = 0; b < dist.counts.size(); ++b) {
        const double lo = dist.bin_edges[b], hi = dist.bin_edges[b + 1];
        const double centre = 0.5 * (lo + hi);
        const double density = static_cast<double>(dist.counts[b]) / (static_cast<double>(dist.n_elements) * (hi - lo));
        const double z = (centre - dist.mean) / dist.sigma;
        const double gauss = dist.sigma > 0.0 ? std::exp(-0.5 * z * z) / (dist.sigma * std::sqrt(2.0 * std::numbers::pi)) : 0.0;
        hist.push_back({centre, static_cast<double>(dist.counts[b]), density, gauss});
    }
    out.table("elements.csv", {"bin_centre", "count", "density", "gaussian_density"}, std::move(hist));

    if (M.Q() >= 1.0) {
        const auto b = mp_bounds(M.Q());
        std::vector<std::vector<double>> curve;
        for (std::size_t i = 0; i <= p.mp_points; ++i) {
            const double l = b.lambda_min + (b.lambda_max - b.lambda_min) * static_cast<double>(i) / p.mp_points;
            curve.push_back({l, mp_density(l, M.Q())});
        }
        out.table("mp_density.csv", {"lambda", "density"}, std::move(curve));
        s["mp"] = json{{"lambda_min", b.lambda_min},
                       {"lambda_max", b.lambda_max},
                       {"fraction_outside", fraction_outside_mp(dec.eigenvalues, M.Q())}};
    } else {
        s["mp"] = json{{"warning", "Q < 1, no Marchenko-Pastur comparison"}};
    }

    const std::size_t modes = std::min(p.modes, M.K());
    std::vector<Eigensignal> sig;
    json outliers = json::array();
    for (std::size_t k = 1; k <= modes; ++k) {
        sig.push_back(eigensignal(M, dec, k));
        for (const auto& o : eigensignal_outliers(sig.back(), M, p.threshold))
            outliers.push_back(json{{"mode", k},
                                    {"index", o.index},
                                    {"value", o.value},
                                    {"score", o.score},
                                    {"seconds_into_week", o.seconds_into_week},
                                    {"hours_into_week", static_cast<double>(o.seconds_into_week) / 3600.0}});
    }
    std::vector<std::string> cols{"t", "seconds_into_week", "hours_into_week"};
    for (std::size_t k = 1; k <= modes; ++k) cols.push_back("z" + std::to_string(k));
    std::vector<std::vector<double>> zs;
    for (std::size_t t = 0; t < M.T_K(); ++t) {
        const auto tow = static_cast<double>((M.week_offset + static_cast<std::int64_t>(t) * M.step) % (7 * 86400));
        std::vector<double> row{static_cast<double>(t), tow, tow / 3600.0};
        for (const auto& z : sig) row.push_back(z.z[t]);
        zs.push_back(std::move(row));
    }
    out.table("eigensignals.csv", std::move(cols), std::move(zs));
    s["outlier_threshold"] = p.threshold;
    s["outliers"] = outliers;
    s["lambda_max_observed"] = dec.eigenvalues[0];
    return s;
}

MfdfaConfig to_config(const MfdfaParams& p) {
    MfdfaConfig c;
    c.r_values = p.r;
    c.n_min = p.n_min;
    c.n_max = p.n_max;
    c.n_count = p.n_count;
    c.poly_order = p.order;
    c.scaling_window = {p.window_lo, p.window_hi};
    return c;
}

void write_mfdfa_tables(const MfdfaReport& rep, const Output& out, const std::string& prefix) {
    std::vector<std::string> cols{"n", "ln_n"};
    for (double r : rep.surface.r_values) cols.push_back("F_r=" + format_double(r));
    std::vector<std::vector<double>> rows;
    for (std::size_t s = 0; s < rep.surface.scales.size(); ++s) {
        const double n = static_cast<double>(rep.surface.scales[s]);
        std::vector<double> row{n, std::log(n)};
        for (const auto& Fr : rep.surface.F) row.push_back(Fr[s]);
        rows.push_back(std::move(row));
    }
    out.table(prefix + "fluctuation.csv", std::move(cols), std::move(rows));
    std::vector<std::vector<double>> sp;
    const auto& m = rep.spectrum;
    for (std::size_t i = 0; i < m.r_values.size(); ++i)
        sp.push_back({m.r_values[i], m.h[i], rep.hurst.h_stderr[i], m.tau[i], m.alpha[i], m.f_alpha[i]});
    out.table(prefix + "spectrum.csv", {"r", "h", "h_stderr", "tau", "alpha", "f_alpha"}, std::move(sp));
}

json spectrum_summary(const MfdfaReport& rep) {
    const auto& m = rep.spectrum;
    const auto peak = std::max_element(m.f_alpha.begin(), m.f_alpha.end()) - m.f_alpha.begin();
    return json{{"width", m.width},
                {"alpha_min", *std::min_element(m.alpha.begin(), m.alpha.end())},
                {"alpha_max", *std::max_element(m.alpha.begin(), m.alpha.end())},
                {"f_min", *std::min_element(m.f_alpha.begin(), m.f_alpha.end())},
                {"alpha_at_peak", m.alpha[static_cast<std::size_t>(peak)]},
                {"h_first", m.h.front()},
                {"h_last", m.h.back()},
                {"anomalous", m.anomalous}};
}

json do_mfdfa(const MfdfaParams& p, const ReturnSeries& series, const Output& out) {
    const auto rep = mfdfa(series.values(), to_config(p));
    write_mfdfa_tables(rep, out, "");
    json s{{"n_samples", series.size()},
           {"scaling_window", {rep.config.scaling_window.first, rep.config.scaling_window.second}},
           {"scales_in_window", rep.hurst.n_scales},
           {"n_scales", rep.surface.scales.size()},
           {"poly_order", rep.config.poly_order},
           {"spectrum", spectrum_summary(rep)}};
    if (p.shuffle) {
        const auto sh = shuffle_surrogate(series.values(), p.shuffle_seed);
        const auto srep = mfdfa(sh, to_config(p));
        write_mfdfa_tables(srep, out, "shuffled_");
        s["shuffled"] = spectrum_summary(srep);
    }
    return s;
}

json do_epps(const EppsParams& p, const std::array<TickSeries, 3>& triple, const Output& out) {
    const auto curve = epps_curve(triple, p.dt, p.triangle);
    std::vector<std::vector<double>> rows;
    const double minutes = static_cast<double>(triple[0].grid().step) / 60.0;
    for (std::size_t i = 0; i < curve.dt_grid.size(); ++i) {
        const auto& l = curve.lambdas[i];
        rows.push_back({static_cast<double>(curve.dt_grid[i]), curve.dt_grid[i] * minutes, l[0], l[1], l[2],
                        l[0] + l[1] + l[2], static_cast<double>(curve.n_returns[i])});
    }
    out.table("epps.csv", {"dt", "dt_minutes", "lambda1", "lambda2", "lambda3", "trace", "n_returns"}, std::move(rows));
    std::vector<std::vector<double>> vec;
    for (int c = 0; c < 3; ++c)
        vec.push_back({static_cast<double>(c + 1), curve.eigenvectors_at_max_dt(0, c), curve.eigenvectors_at_max_dt(1, c),
                       curve.eigenvectors_at_max_dt(2, c)});
    out.table("eigenvectors_max_dt.csv", {"mode", "v1", "v2", "v3"}, std::move(vec));
    json s{{"labels", curve.labels},
           {"orientation", curve.orientation},
           {"triangle", curve.is_triangle},
           {"returns", "non-overlapping, gap-spanning returns excluded"}};
    if (curve.lambdas.size() >= 5) {
        const auto sat = saturation_scale(curve, p.fraction);
        s["saturation"] = json{{"fraction", sat.fraction},
                               {"saturated", sat.saturated},
                               {"dt_star", sat.dt_star ? json(*sat.dt_star) : json(nullptr)}};
    }
    return s;
}

GeneratorSpec to_spec(const SynthParams& p) {
    GeneratorSpec s;
    s.kind = parse_generator_kind(p.kind);
    s.seed = p.seed;
    s.length = p.length;
    auto& g = s.params;
    g.sigma = p.sigma;
    g.phi = p.phi;
    g.a = p.a;
    g.m = p.m;
    g.conservation = parse_conservation(p.conservation);
    g.mass_spread = p.mass_spread;
    g.q = p.q;
    g.qg_sigma = p.qg_sigma;
    g.decay = p.decay;
    g.vol_of_vol = p.vol_of_vol;
    g.lag = p.lag;
    g.coupling = p.coupling;
    g.follower_noise = p.follower_noise;
    g.independent_companion = p.independent_companion;
    g.return_scale = p.return_scale;
    g.symmetric_sections = p.symmetric_sections;
    g.currencies = p.currencies;
    g.spike_rate = p.spike_rate;
    g.spike_scale = p.spike_scale;
    g.spike_tail_index = p.spike_tail_index;
    g.start_epoch = p.start_epoch;
    g.step = p.step;
    if (s.kind == GeneratorKind::binomial_cascade && p.length == std::size_t{1} << 17 && p.m != 17) s.length = 0;
    return s;
}

json write_generated(const Generated& g, const std::string& kind, const Output& out) {
    json files = json::array();
    for (std::size_t i = 0; i < g.ticks.size(); ++i) {
        const std::string name = kind + "_" + std::to_string(i) + ".csv";
        write_series(out.file(name), g.ticks[i]);
        files.push_back(json{{"file", name}, {"label", g.ticks[i].label()}, {"samples", g.ticks[i].size()}});
    }
    for (std::size_t i = 0; i < g.returns.size(); ++i) {
        const std::string name = g.returns.size() == 1 ? kind + ".csv" : kind + "_" + std::to_string(i) + ".csv";
        write_series(out.file(name), g.returns[i]);
        files.push_back(json{{"file", name}, {"label", g.returns[i].label()}, {"samples", g.returns[i].size()}});
    }
    return files;
}

// --- command plumbing -------------------------------------------------------

template <typename P>
void check_keys(const json& given, const P& defaults, const std::string& where) {
    if (!given.is_object()) throw UsageError(where + " must be a JSON object");
    const json ref = defaults;
    for (const auto& [key, value] : given.items()) {
        if (!ref.contains(key)) throw UsageError("unknown config key '" + where + "." + key + "'");
        if (ref[key].is_object()) {
            if (!value.is_object()) throw UsageError("config key '" + where + "." + key + "' must be an object");
            for (const auto& [k2, v2] : value.items())
                if (!ref[key].contains(k2)) throw UsageError("unknown config key '" + where + "." + key + "." + k2 + "'");
        }
    }
}

std::optional<std::string> find_config(const std::vector<std::string>& args) {
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
    }
    return std::nullopt;
}

template <typename P>
void load_config(const std::string& path, const std::string& command, P& params) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw UsageError("config '" + path + "' is not valid JSON: " + e.what());
    }
    if (!j.is_object() || !j.contains("schema_version") || j["schema_version"] != kSchemaVersion)
        throw UsageError("config '" + path + "' must declare schema_version " + std::to_string(kSchemaVersion));
    if (j.contains("command") && j["command"] != command)
        throw UsageError("config '" + path + "' is for command '" + j["command"].get<std::string>() + "', not '" +
                         command + "'");
    const json p = j.value("params", json::object());
    check_keys(p, P{}, "params");
    try {
        params = p.get<P>();
    } catch (const json::exception& e) {
        throw UsageError("config '" + path + "': " + e.what());
    }
}

struct Common {
    std::string output_dir;
    std::string config;
};

void add_common(CLI::App& app, Common& c) {
    app.add_option("--output-dir,-o", c.output_dir, "Directory for result files (created if missing; default <command>_out)");
    app.add_option("--config", c.config, "JSON config; explicit flags override its values");
}

void add_synth_options(CLI::App& app, SynthParams& s) {
    app.add_option("--kind", s.kind,
                   "iid_gaussian, ar1, binomial_cascade, q_gaussian_iid, long_memory_volatility, "
                   "triangle_consistent_rates, lag_coupled_pair, spiked_residual");
    app.add_option("--seed", s.seed);
    app.add_option("--length", s.length, "Samples (binomial_cascade uses 2^m)");
    app.add_option("--sigma", s.sigma);
    app.add_option("--phi", s.phi);
    app.add_option("--a", s.a, "Cascade weight");
    app.add_option("--m", s.m, "Cascade depth");
    app.add_option("--conservation", s.conservation, "exact or in_average");
    app.add_option("--mass-spread", s.mass_spread);
    app.add_option("--q", s.q);
    app.add_option("--qg-sigma", s.qg_sigma);
    app.add_option("--decay", s.decay);
    app.add_option("--vol-of-vol", s.vol_of_vol);
    app.add_option("--lag", s.lag);
    app.add_option("--coupling", s.coupling);
    app.add_option("--follower-noise", s.follower_noise);
    app.add_flag("--independent-companion,!--no-independent-companion", s.independent_companion);
    app.add_option("--return-scale", s.return_scale);
    app.add_flag("--symmetric-sections,!--no-symmetric-sections", s.symmetric_sections);
    app.add_option("--spike-rate", s.spike_rate);
    app.add_option("--spike-scale", s.spike_scale);
    app.add_option("--spike-tail-index", s.spike_tail_index);
    app.add_option("--start-epoch", s.start_epoch);
    app.add_option("--step", s.step);
}

void add_distfit_options(CLI::App& app, DistfitParams& p) {
    app.add_option("--dt", p.dt, "Return lag in grid steps (price input)");
    app.add_flag("--exclude-gaps,!--include-gaps", p.exclude_gaps, "Drop returns that touch carried-forward prices");
    app.add_option("--range-lo", p.range_lo, "Lower bound of the fitted |x| range");
    app.add_option("--range-hi", p.range_hi, "Upper bound of the fitted |x| range (0 = none)");
    app.add_option("--q-lo", p.q_lo);
    app.add_option("--q-hi", p.q_hi);
    app.add_option("--q-step", p.q_step);
    app.add_option("--max-points", p.max_points);
    app.add_option("--min-rank", p.min_rank);
    app.add_option("--max-iterations", p.max_iterations);
    app.add_option("--gradient-tolerance", p.gradient_tolerance);
    app.add_flag("--refine-q,!--no-refine-q", p.refine_q);
}

void add_autocorr_options(CLI::App& app, AutocorrParams& p) {
    app.add_option("--dt", p.dt);
    app.add_option("--max-lag", p.max_lag);
    app.add_flag("--volatility,!--returns", p.volatility, "Analyse |normalised returns|");
    app.add_flag("--detrend-daily,!--no-detrend-daily", p.detrend_daily);
    app.add_option("--fit-lo", p.fit_lo, "Power-law fit window start (lags)");
    app.add_option("--fit-hi", p.fit_hi, "Power-law fit window end (lags)");
}

void add_mfdfa_options(CLI::App& app, MfdfaParams& p) {
    app.add_option("--dt", p.dt);
    app.add_option("--r", p.r, "Comma-separated r values (default -4..4 step 0.4)")->delimiter(',');
    app.add_option("--n-min", p.n_min);
    app.add_option("--n-max", p.n_max, "0 = count/4");
    app.add_option("--n-count", p.n_count);
    app.add_option("--order", p.order, "Detrending polynomial order");
    app.add_option("--window-lo", p.window_lo);
    app.add_option("--window-hi", p.window_hi, "0 = count/50");
    app.add_flag("--shuffle,!--no-shuffle", p.shuffle, "Also analyse a shuffled surrogate");
    app.add_option("--shuffle-seed", p.shuffle_seed);
}

void add_rmt_options(CLI::App& app, RmtParams& p) {
    app.add_option("--week-start", p.week_start, "e.g. \"Sun 21:00\"");
    app.add_option("--week-end", p.week_end, "e.g. \"Fri 22:00\"");
    app.add_option("--threshold", p.threshold, "Eigensignal outlier threshold in standard deviations");
    app.add_option("--modes", p.modes);
    app.add_option("--bins", p.bins);
    app.add_option("--mp-points", p.mp_points);
}

void add_epps_options(CLI::App& app, EppsParams& p) {
    app.add_flag("--triangle,!--no-triangle", p.triangle, "Orient the legs cyclically");
    app.add_option("--dt", p.dt, "Comma-separated dt grid in steps")->delimiter(',');
    app.add_option("--fraction", p.fraction, "Saturation fraction");
}

int finish(const Output& out, const json& summary, std::ostream& os) {
    write_json(out.file("summary.json"), summary);
    os << "wrote " << out.dir.string() << '\n';
    return kOk;
}

template <typename P, typename Bind, typename Body>
int command(const std::string& name, const std::string& description, P params, const std::vector<std::string>& args,
            std::ostream& os, std::ostream& es, Bind bind, Body body) {
    Common common;
    if (const auto cfg = find_config(args)) load_config(*cfg, name, params);
    CLI::App app{description, "fxmf " + name};
    add_common(app, common);
    bind(app, params);
    std::vector<const char*> argv;
    argv.push_back("fxmf");
    for (std::size_t i = 1; i < args.size(); ++i) argv.push_back(args[i].c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        os << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        es << "error: " << e.what() << "\n\n" << app.help();
        return kUsageError;
    }
    const json pj = params;
    const Output out = make_output(common.output_dir.empty() ? name + "_out" : common.output_dir, name, pj);
    return finish(out, body(params, out), os);
}

std::array<TickSeries, 3> load_triple(const std::vector<std::string>& paths) {
    if (paths.size() != 3) throw UsageError("expected exactly three series, got " + std::to_string(paths.size()));
    auto a = read_series(paths[0]), b = read_series(paths[1]), c = read_series(paths[2]);
    return {require_ticks(a, "epps"), require_ticks(b, "epps"), require_ticks(c, "epps")};
}

std::string usage() {
    return "usage: fxmf <command> [options]\n\n"
           "commands:\n"
           "  ingest    raw price file -> canonical uniform-grid series\n"
           "  returns   log returns, normalised returns, residual or volatility series\n"
           "  distfit   q-Gaussian fit of both wings of normalised returns\n"
           "  autocorr  autocorrelation of returns or volatility, optional power-law fit\n"
           "  rmt       weekly-segment correlation matrix, eigenvalues, eigensignals\n"
           "  mfdfa     multifractal detrended fluctuation analysis\n"
           "  epps      eigenvalues of a 3x3 correlation matrix across return scales\n"
           "  synth     synthetic series generators\n"
           "  pipeline  generate or read data and run every analysis\n\n"
           "Run 'fxmf <command> --help' for options.\n";
}

int dispatch(const std::vector<std::string>& args, std::ostream& os, std::ostream& es) {
    const std::string& cmd = args[0];
    if (cmd == "ingest") {
        return command(
            "ingest", "Read a delimited price file onto a uniform time grid", IngestParams{}, args, os, es,
            [](CLI::App& app, IngestParams& p) {
                app.add_option("input,--input,-i", p.input, "Price file");
                app.add_option("--delimiter", p.delimiter);
                app.add_flag("--header,!--no-header", p.header);
                app.add_option("--timestamp-column", p.timestamp_column, "Header name or zero-based index");
                app.add_option("--price-column", p.price_column, "Header name or zero-based index");
                app.add_option("--timestamp-format", p.timestamp_format, "auto, epoch or iso8601");
                app.add_option("--step", p.step, "Grid step in seconds");
                app.add_option("--label", p.label, "Pair label A/B");
                app.add_option("--resample", p.resample, "Coarsening factor");
            },
            [](const IngestParams& p, const Output& out) {
                if (p.input.empty()) throw UsageError("ingest needs an input file");
                if (p.delimiter.size() != 1) throw UsageError("delimiter must be a single character");
                PriceFileFormat f;
                f.delimiter = p.delimiter[0];
                f.has_header = p.header;
                f.timestamp_column = p.timestamp_column;
                f.price_column = p.price_column;
                f.timestamp_format = parse_timestamp_format(p.timestamp_format);
                f.step = p.step;
                f.label = p.label;
                auto s = parse_price_file(p.input, f);
                if (p.resample > 1) s = resample(s, p.resample);
                write_series(out.file("series.csv"), s);
                return json{{"samples", s.size()},
                            {"gaps", s.gap_count()},
                            {"start_epoch", s.grid().start_epoch},
                            {"step", s.grid().step},
                            {"file", "series.csv"}};
            });
    }
    if (cmd == "returns") {
        return command(
            "returns", "Log returns on the series grid", ReturnsParams{}, args, os, es,
            [](CLI::App& app, ReturnsParams& p) {
                app.add_option("input,--input,-i", p.input, "Canonical price series");
                app.add_option("--triangle", p.triangle, "Three price series A/B B/C C/A for residual returns")
                    ->expected(3);
                app.add_option("--dt", p.dt);
                app.add_flag("--overlap,!--no-overlap", p.overlap);
                app.add_flag("--normalize,!--no-normalize", p.normalize);
                app.add_flag("--volatility", p.volatility, "Absolute normalised returns");
                app.add_flag("--detrend-daily", p.detrend_daily, "Divide volatility by its time-of-day profile");
            },
            [](const ReturnsParams& p, const Output& out) {
                ReturnSeries r = [&] {
                    if (!p.triangle.empty()) {
                        const auto t = load_triple(p.triangle);
                        return residual_returns(Triangle({log_returns(t[0], p.dt, p.overlap),
                                                          log_returns(t[1], p.dt, p.overlap),
                                                          log_returns(t[2], p.dt, p.overlap)}));
                    }
                    if (p.input.empty()) throw UsageError("returns needs an input series or --triangle");
                    const auto f = read_series(p.input);
                    return log_returns(require_ticks(f, "returns"), p.dt, p.overlap);
                }();
                if (p.volatility) {
                    if (r.kind() != ReturnKind::plain) throw UsageError("--volatility needs plain returns");
                    r = volatility(normalize(r));
                    if (p.detrend_daily) r = remove_daily_trend(r, daily_volatility_profile(r));
                } else if (p.normalize) {
                    r = normalize(r);
                }
                write_series(out.file("returns.csv"), r);
                std::size_t flagged = 0;
                for (auto f : r.spans_gap()) flagged += f;
                json s{{"samples", r.size()},
                       {"kind", to_string(r.kind())},
                       {"flagged", flagged},
                       {"file", "returns.csv"}};
                if (r.kind() == ReturnKind::residual) {
                    double worst = 0.0;
                    for (double v : r.values()) worst = std::max(worst, std::fabs(v));
                    s["max_abs_residual"] = worst;
                }
                return s;
            });
    }
    if (cmd == "distfit") {
        return command(
            "distfit", "Fit q-Gaussians to both wings of the normalised return distribution", DistfitParams{}, args,
            os, es,
            [](CLI::App& app, DistfitParams& p) {
                app.add_option("input,--input,-i", p.input, "Price or return series");
                add_distfit_options(app, p);
            },
            [](const DistfitParams& p, const Output& out) {
                if (p.input.empty()) throw UsageError("distfit needs an input series");
                return do_distfit(p, read_series(p.input), out);
            });
    }
    if (cmd == "autocorr") {
        return command(
            "autocorr", "Autocorrelation function with a white-noise band", AutocorrParams{}, args, os, es,
            [](CLI::App& app, AutocorrParams& p) {
                app.add_option("input,--input,-i", p.input, "Price or return series");
                add_autocorr_options(app, p);
            },
            [](const AutocorrParams& p, const Output& out) {
                if (p.input.empty()) throw UsageError("autocorr needs an input series");
                return do_autocorr(p, read_series(p.input), out);
            });
    }
    if (cmd == "rmt") {
        return command(
            "rmt", "Correlation matrix across weekly segments", RmtParams{}, args, os, es,
            [](CLI::App& app, RmtParams& p) {
                app.add_option("input,--input,-i", p.input, "Price or unit-step return series");
                add_rmt_options(app, p);
            },
            [](const RmtParams& p, const Output& out) {
                if (p.input.empty()) throw UsageError("rmt needs an input series");
                return do_rmt(p, to_returns(read_series(p.input), 1), out);
            });
    }
    if (cmd == "mfdfa") {
        return command(
            "mfdfa", "Multifractal detrended fluctuation analysis", MfdfaParams{}, args, os, es,
            [](CLI::App& app, MfdfaParams& p) {
                app.add_option("input,--input,-i", p.input, "Price or return series");
                add_mfdfa_options(app, p);
            },
            [](const MfdfaParams& p, const Output& out) {
                if (p.input.empty()) throw UsageError("mfdfa needs an input series");
                return do_mfdfa(p, to_returns(read_series(p.input), p.dt), out);
            });
    }
    if (cmd == "epps") {
        return command(
            "epps", "3x3 correlation eigenvalues against return scale", EppsParams{}, args, os, es,
            [](CLI::App& app, EppsParams& p) {
                app.add_option("--triple", p.triple, "Three price series")->expected(3);
                add_epps_options(app, p);
            },
            [](const EppsParams& p, const Output& out) { return do_epps(p, load_triple(p.triple), out); });
    }
    if (cmd == "synth") {
        return command(
            "synth", "Generate synthetic series", SynthParams{}, args, os, es,
            [](CLI::App& app, SynthParams& p) { add_synth_options(app, p); },
            [](const SynthParams& p, const Output& out) {
                const auto g = generate(to_spec(p));
                return json{{"kind", p.kind}, {"files", write_generated(g, p.kind, out)}};
            });
    }
    if (cmd == "pipeline") {
        return command(
            "pipeline", "Run every analysis on generated or supplied data", PipelineParams{}, args, os, es,
            [](CLI::App& app, PipelineParams& p) {
                app.add_option("--inputs", p.inputs, "One or three price series (default: generate)");
                app.add_option("--kind", p.synth.kind, "Generator kind when no inputs are given");
                app.add_option("--seed", p.synth.seed);
                app.add_option("--length", p.synth.length);
            },
            [](const PipelineParams& p, const Output& out) {
                std::vector<TickSeries> ticks;
                std::optional<ReturnSeries> given_returns;
                json s;
                if (p.inputs.empty()) {
                    const auto g = generate(to_spec(p.synth));
                    s["data"] = write_generated(g, p.synth.kind, sub_output(out, "data"));
                    ticks = g.ticks;
                    if (!g.returns.empty()) given_returns = g.returns.front();
                } else {
                    if (p.inputs.size() != 1 && p.inputs.size() != 3)
                        throw UsageError("pipeline takes one or three input series");
                    for (const auto& path : p.inputs) {
                        auto f = read_series(path);
                        if (f.ticks) {
                            ticks.push_back(*f.ticks);
                        } else if (!given_returns) {
                            given_returns = *f.returns;
                        }
                    }
                }
                SeriesFile primary;
                if (!ticks.empty()) primary.ticks = ticks.front();
                else if (given_returns) primary.returns = *given_returns;
                else throw UsageError("pipeline has no series to analyse");

                s["distfit"] = do_distfit(p.distfit, primary, sub_output(out, "distfit"));
                s["autocorr"] = do_autocorr(p.autocorr, primary, sub_output(out, "autocorr"));
                AutocorrParams vol = p.autocorr;
                vol.volatility = true;
                const bool plain = primary.ticks || primary.returns->kind() == ReturnKind::plain;
                if (plain) s["autocorr_volatility"] = do_autocorr(vol, primary, sub_output(out, "autocorr_volatility"));
                s["mfdfa"] = do_mfdfa(p.mfdfa, to_returns(primary, p.mfdfa.dt), sub_output(out, "mfdfa"));
                const auto unit = to_returns(primary, 1);
                const auto weeks = segment_weeks(unit.grid(), parse_week_time(p.rmt.week_start),
                                                 parse_week_time(p.rmt.week_end));
                if (weeks.K >= 2) s["rmt"] = do_rmt(p.rmt, unit, sub_output(out, "rmt"));
                else s["rmt"] = json{{"skipped", "fewer than two complete weekly windows"}};
                if (ticks.size() == 3) {
                    s["epps"] = do_epps(p.epps, {ticks[0], ticks[1], ticks[2]}, sub_output(out, "epps"));
                    if (p.epps.triangle) {
                        const int dt = 1;
                        const auto o = cyclic_orientation({ticks[0].label(), ticks[1].label(), ticks[2].label()});
                        if (o) {
                            std::array<ReturnSeries, 3> legs{log_returns(ticks[0], dt), log_returns(ticks[1], dt),
                                                             log_returns(ticks[2], dt)};
                            double worst = 0.0;
                            for (std::size_t i = 0; i < legs[0].size(); ++i) {
                                double g = 0.0;
                                for (int k = 0; k < 3; ++k) g += (*o)[k] * legs[k].values()[i];
                                worst = std::max(worst, std::fabs(g));
                            }
                            s["max_abs_residual"] = worst;
                        }
                    }
                } else {
                    s["epps"] = json{{"skipped", "needs three price series"}};
                }
                return s;
            });
    }
    es << "error: unknown command '" << cmd << "'\n\n" << usage();
    return kUsageError;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& os, std::ostream& es) {
    if (args.empty()) {
        es << usage();
        return kUsageError;
    }
    if (args[0] == "-h" || args[0] == "--help" || args[0] == "help") {
        os << usage();
        return kOk;
    }
    if (args[0] == "--version") {
        os << "fxmf " << kToolVersion << '\n';
        return kOk;
    }
    try {
        return dispatch(args, os, es);
    } catch (const UsageError& e) {
        es << "usage error: " << e.what() << '\n';
        return kUsageError;
    } catch (const FitNonConvergence& e) {
        es << "fit error: " << e.what() << " (objective " << e.best().objective << ")\n";
        return kDataError;
    } catch (const Error& e) {
        es << "error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::exception& e) {
        es << "internal error: " << e.what() << '\n';
        return kDataError;
    }
}

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace fxmf::cli
