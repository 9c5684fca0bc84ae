#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "fxmf/cli.hpp"
#include "fxmf/epps.hpp"
#include "fxmf/mfdfa.hpp"
#include "fxmf/qgaussian.hpp"
#include "fxmf/rmt.hpp"
#include "fxmf/special.hpp"
#include "fxmf/synth.hpp"
#include "fxmf/temporal.hpp"

namespace py = pybind11;
using namespace fxmf;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vec(const Array& a) {
    if (a.ndim() != 1) throw UsageError("expected a one-dimensional array");
    return {a.data(), a.data() + a.size()};
}

template <typename T>
py::array_t<T> to_array(const std::vector<T>& v) {
    return py::array_t<T>(static_cast<py::ssize_t>(v.size()), v.data());
}

Wing parse_wing(const std::string& s) {
    if (s == "right") return Wing::right;
    if (s == "left") return Wing::left;
    throw UsageError("wing must be 'left' or 'right', got '" + s + "'");
}

py::dict wing_dict(const WingFit& w) {
    py::dict d;
    d["q"] = w.params.q;
    d["B"] = w.params.B;
    d["mu"] = w.params.mu;
    d["objective"] = w.objective;
    d["n_points"] = w.n_points;
    d["converged"] = w.converged;
    return d;
}

GeneratorParams params_from(const py::kwargs& kw) {
    GeneratorParams p;
    for (const auto& [k, v] : kw) {
        const auto key = k.cast<std::string>();
        if (key == "sigma") p.sigma = v.cast<double>();
        else if (key == "phi") p.phi = v.cast<double>();
        else if (key == "a") p.a = v.cast<double>();
        else if (key == "m") p.m = v.cast<int>();
        else if (key == "conservation") p.conservation = parse_conservation(v.cast<std::string>());
        else if (key == "mass_spread") p.mass_spread = v.cast<double>();
        else if (key == "q") p.q = v.cast<double>();
        else if (key == "qg_sigma") p.qg_sigma = v.cast<double>();
        else if (key == "decay") p.decay = v.cast<double>();
        else if (key == "vol_of_vol") p.vol_of_vol = v.cast<double>();
        else if (key == "lag") p.lag = v.cast<int>();
        else if (key == "coupling") p.coupling = v.cast<double>();
        else if (key == "follower_noise") p.follower_noise = v.cast<double>();
        else if (key == "independent_companion") p.independent_companion = v.cast<bool>();
        else if (key == "return_scale") p.return_scale = v.cast<double>();
        else if (key == "symmetric_sections") p.symmetric_sections = v.cast<bool>();
        else if (key == "spike_rate") p.spike_rate = v.cast<double>();
        else if (key == "spike_scale") p.spike_scale = v.cast<double>();
        else if (key == "spike_tail_index") p.spike_tail_index = v.cast<double>();
        else if (key == "start_epoch") p.start_epoch = v.cast<std::int64_t>();
        else if (key == "step") p.step = v.cast<std::int64_t>();
        else throw UsageError("unknown generator parameter '" + key + "'");
    }
    return p;
}

py::dict report_dict(const MfdfaReport& rep) {
    py::dict d;
    d["scales"] = to_array(rep.surface.scales);
    d["r"] = to_array(rep.spectrum.r_values);
    py::list F;
    for (const auto& row : rep.surface.F) F.append(to_array(row));
    d["F"] = F;
    d["h"] = to_array(rep.hurst.h);
    d["h_stderr"] = to_array(rep.hurst.h_stderr);
    d["tau"] = to_array(rep.spectrum.tau);
    d["alpha"] = to_array(rep.spectrum.alpha);
    d["f_alpha"] = to_array(rep.spectrum.f_alpha);
    d["width"] = rep.spectrum.width;
    d["anomalous"] = rep.spectrum.anomalous;
    d["scaling_window"] = rep.config.scaling_window;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Native core of fxmf";

    static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
    py::register_exception<UsageError>(m, "UsageError", base.ptr());
    py::register_exception<DataError>(m, "DataError", base.ptr());
    py::register_exception<DegenerateInputError>(m, "DegenerateInputError", base.ptr());
    py::register_exception<AlignmentError>(m, "AlignmentError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<FitNonConvergence>(m, "FitNonConvergence", base.ptr());

    m.def("hyp2f1", &hyp2f1, py::arg("a"), py::arg("b"), py::arg("c"), py::arg("z"));
    m.def("q_exponential", &q_exponential, py::arg("x"), py::arg("q"));

    py::class_<QGaussianParams>(m, "QGaussianParams")
        .def(py::init([](double q, double B, double mu) { return QGaussianParams{q, B, mu}; }), py::arg("q"),
             py::arg("B"), py::arg("mu") = 0.0)
        .def_static("from_sigma", &QGaussianParams::from_sigma, py::arg("q"), py::arg("sigma"), py::arg("mu") = 0.0)
        .def_readwrite("q", &QGaussianParams::q)
        .def_readwrite("B", &QGaussianParams::B)
        .def_readwrite("mu", &QGaussianParams::mu)
        .def("sigma", &QGaussianParams::sigma)
        .def("__repr__", [](const QGaussianParams& p) {
            std::ostringstream s;
            s << "QGaussianParams(q=" << p.q << ", B=" << p.B << ", mu=" << p.mu << ")";
            return s.str();
        });

    m.def("pdf", [](const Array& x, const QGaussianParams& p) {
        auto v = to_vec(x);
        for (auto& e : v) e = pdf(e, p);
        return to_array(v);
    });
    m.def("cdf_wing", [](const Array& x, const QGaussianParams& p, const std::string& wing) {
        const Wing w = parse_wing(wing);
        auto v = to_vec(x);
        for (auto& e : v) e = cdf_wing(e, p, w);
        return to_array(v);
    }, py::arg("x"), py::arg("params"), py::arg("wing") = "right");
    m.def("quantile_right", &quantile_right, py::arg("p"), py::arg("params"));

    m.def("fit", [](const Array& sample, double range_lo, double range_hi) {
        FitOptions o;
        o.range_lo = range_lo;
        if (range_hi > 0.0) o.range_hi = range_hi;
        const auto v = to_vec(sample);
        const auto f = fit(EmpiricalCdf(v), o);
        py::dict d;
        d["left"] = wing_dict(f.left);
        d["right"] = wing_dict(f.right);
        return d;
    }, py::arg("sample"), py::arg("range_lo") = 0.0, py::arg("range_hi") = 0.0,
       "q-Gaussian fit of both wings; range_hi <= 0 means unbounded");

    m.def("autocorrelation", [](const Array& x, std::size_t max_lag) {
        const auto v = to_vec(x);
        const auto ac = autocorrelation(std::span<const double>(v), max_lag);
        py::dict d;
        d["lags"] = to_array(ac.lags);
        d["c"] = to_array(ac.c);
        d["n_eff"] = to_array(ac.n_eff);
        d["band_95"] = to_array(ac.confidence_95);
        return d;
    }, py::arg("x"), py::arg("max_lag"));
    m.def("fit_power_law", [](const Array& x, std::size_t max_lag, std::size_t lo, std::size_t hi) {
        const auto v = to_vec(x);
        const auto f = fit_power_law(autocorrelation(std::span<const double>(v), max_lag), {lo, hi});
        py::dict d;
        d["exponent"] = f.exponent;
        d["amplitude"] = f.amplitude;
        d["r_squared"] = f.r_squared;
        d["n_points"] = f.n_points;
        return d;
    }, py::arg("x"), py::arg("max_lag"), py::arg("lo"), py::arg("hi"));

    m.def("mfdfa", [](const Array& x, std::vector<double> r, std::size_t n_min, std::size_t n_max, std::size_t n_count,
                      int order, std::pair<std::size_t, std::size_t> window) {
        MfdfaConfig c;
        c.r_values = std::move(r);
        c.n_min = n_min;
        c.n_max = n_max;
        c.n_count = n_count;
        c.poly_order = order;
        c.scaling_window = window;
        const auto v = to_vec(x);
        return report_dict(mfdfa(v, c));
    }, py::arg("x"), py::arg("r") = std::vector<double>{}, py::arg("n_min") = 16, py::arg("n_max") = 0,
       py::arg("n_count") = 24, py::arg("order") = 2, py::arg("window") = std::pair<std::size_t, std::size_t>{16, 0});
    m.def("shuffle_surrogate", [](const Array& x, std::uint64_t seed) {
        const auto v = to_vec(x);
        return to_array(shuffle_surrogate(v, seed));
    }, py::arg("x"), py::arg("seed"));

    m.def("generate", [](const std::string& kind, std::size_t length, std::uint64_t seed, const py::kwargs& kw) {
        GeneratorSpec s;
        s.kind = parse_generator_kind(kind);
        s.length = length;
        s.seed = seed;
        s.params = params_from(kw);
        const auto g = generate(s);
        py::list out;
        for (const auto& t : g.ticks) out.append(py::make_tuple(t.label(), to_array(t.values())));
        for (const auto& r : g.returns) out.append(py::make_tuple(r.label(), to_array(r.values())));
        return out;
    }, py::arg("kind"), py::arg("length") = std::size_t{1} << 17, py::arg("seed") = 1,
       "List of (label, values): prices for rate generators, returns otherwise");

    m.def("epps", [](const std::vector<Array>& prices, const std::vector<std::string>& labels, std::vector<int> dt,
                     bool triangle, std::int64_t start_epoch, std::int64_t step) {
        if (prices.size() != 3 || labels.size() != 3) throw UsageError("epps needs three price series and labels");
        std::vector<TickSeries> t;
        for (int k = 0; k < 3; ++k) {
            auto v = to_vec(prices[k]);
            const std::size_t n = v.size();
            t.emplace_back(TimeGrid{start_epoch, step, n}, std::move(v), std::vector<std::uint8_t>(n, 0), labels[k]);
        }
        if (dt.empty()) dt = default_dt_grid();
        const auto c = epps_curve({t[0], t[1], t[2]}, dt, triangle);
        py::dict d;
        d["dt"] = to_array(c.dt_grid);
        py::array_t<double> lam({static_cast<py::ssize_t>(c.lambdas.size()), py::ssize_t{3}});
        auto L = lam.mutable_unchecked<2>();
        for (std::size_t i = 0; i < c.lambdas.size(); ++i)
            for (int k = 0; k < 3; ++k) L(static_cast<py::ssize_t>(i), k) = c.lambdas[i][k];
        d["lambdas"] = lam;
        d["labels"] = c.labels;
        d["orientation"] = c.orientation;
        d["saturated"] = py::none();
        d["dt_star"] = py::none();
        if (c.dt_grid.size() >= 5) {
            const auto s = saturation_scale(c);
            d["saturated"] = s.saturated;
            if (s.dt_star) d["dt_star"] = *s.dt_star;
        }
        return d;
    }, py::arg("prices"), py::arg("labels"), py::arg("dt") = std::vector<int>{}, py::arg("triangle") = false,
       py::arg("start_epoch") = 1073250000, py::arg("step") = 60);

    m.def("mp_bounds", [](double Q, double sigma2) {
        const auto b = mp_bounds(Q, sigma2);
        return py::make_tuple(b.lambda_min, b.lambda_max);
    }, py::arg("Q"), py::arg("sigma2") = 1.0);
    m.def("mp_density", [](double lambda, double Q, double sigma2) { return mp_density(lambda, Q, sigma2); },
          py::arg("lam"), py::arg("Q"), py::arg("sigma2") = 1.0);

    m.def("run_cli", [](const std::vector<std::string>& args) {
        std::ostringstream o, e;
        const int code = cli::run(args, o, e);
        return py::make_tuple(code, o.str(), e.str());
    }, py::arg("args"), "Run a subcommand in-process; returns (exit_code, stdout, stderr)");
}
