#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <string>

#include "lorentz/experiments.hpp"
#include "lorentz/exploration.hpp"
#include "lorentz/flight.hpp"
#include "lorentz/geometry.hpp"
#include "lorentz/lab.hpp"
#include "lorentz/middle.hpp"
#include "lorentz/zprocess.hpp"

namespace py = pybind11;
using namespace lorentz;

namespace {

using Triple = std::array<double, 3>;

Vec3 vec(const Triple& a) { return {a[0], a[1], a[2]}; }
UnitVec3 unit(const Triple& a) { return UnitVec3::normalized(vec(a)); }
Triple tup(const Vec3& v) { return {v.x, v.y, v.z}; }

py::dict path_dict(const PiecewisePath& p)
{
    const auto n = static_cast<py::ssize_t>(p.points().size());
    py::array_t<double> t(n);
    py::array_t<double> x({n, py::ssize_t{3}});
    auto tv = t.mutable_unchecked<1>();
    auto xv = x.mutable_unchecked<2>();
    for (py::ssize_t i = 0; i < n; ++i) {
        const Vec3& q = p.points()[static_cast<std::size_t>(i)];
        tv(i) = p.times()[static_cast<std::size_t>(i)];
        xv(i, 0) = q.x;
        xv(i, 1) = q.y;
        xv(i, 2) = q.z;
    }
    py::dict d;
    d["t"] = t;
    d["x"] = x;
    return d;
}

RunConfig config_from(const py::dict& d)
{
    RunConfig cfg;
    for (const auto& [k, v] : d) {
        const auto key = k.cast<std::string>();
        if (key == "r") {
            cfg.r_grid = py::isinstance<py::float_>(v) || py::isinstance<py::int_>(v)
                             ? std::vector<double>{v.cast<double>()}
                             : v.cast<std::vector<double>>();
        } else if (key == "r_grid") {
            cfg.r_grid = v.cast<std::vector<double>>();
        } else if (key == "T") {
            cfg.T = v.cast<double>();
        } else if (key == "trials") {
            cfg.trials = v.cast<std::uint64_t>();
        } else if (key == "seed") {
            cfg.seed = v.cast<std::uint64_t>();
        } else if (key == "experiment") {
            cfg.experiment = v.cast<std::string>();
        } else if (key == "workers") {
            cfg.workers = v.cast<int>();
        } else if (key == "out") {
            cfg.out_dir = v.cast<std::string>();
        } else {
            throw py::value_error("unknown config field '" + key + "'");
        }
    }
    validate(cfg);
    return cfg;
}

py::dict suite_dict(const SuiteResult& res)
{
    py::list gates;
    for (const auto& g : res.gates) {
        py::dict gd;
        gd["name"] = g.name;
        gd["pass"] = g.pass;
        gd["measured"] = g.measured;
        gd["target"] = g.target;
        gd["informational"] = g.informational;
        gates.append(gd);
    }
    py::dict tables;
    for (const auto& t : res.tables) {
        py::dict td;
        td["columns"] = t.columns;
        td["rows"] = t.rows;
        tables[py::str(t.name)] = td;
    }
    py::dict d;
    d["suite"] = res.suite;
    d["pass"] = res.pass() && res.abort_rate() <= kMaxAbortRate;
    d["gates"] = gates;
    d["tables"] = tables;
    d["notes"] = res.notes;
    d["units"] = res.units;
    d["aborted"] = res.aborted;
    d["seeds"] = res.seeds;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Lorentz gas exploration, Z-process and Monte Carlo lab";

    m.def("reflect", [](const Triple& v, const Triple& n) { return tup(reflect(unit(v), unit(n))); }, py::arg("v"),
          py::arg("n"));
    m.def(
        "first_sphere_hit",
        [](const Triple& p, const Triple& v, const Triple& c, double radius, double t_max) -> py::object {
            const auto hit = first_sphere_hit(vec(p), unit(v), vec(c), radius, t_max);
            if (!hit) {
                return py::none();
            }
            return py::make_tuple(hit->t, tup(hit->normal));
        },
        py::arg("p"), py::arg("v"), py::arg("c"), py::arg("radius"), py::arg("t_max"));
    m.def("angle", [](const Triple& u, const Triple& v) { return angle(unit(u), unit(v)); });
    m.def(
        "sojourn_length",
        [](const Triple& x, const Triple& w, const Triple& e, double s) { return sojourn_length(vec(x), unit(w), unit(e), s); },
        py::arg("x"), py::arg("w"), py::arg("e"), py::arg("s"));

    m.def(
        "trajectories",
        [](double r, double T, std::uint64_t seed, std::uint64_t stream) {
            RngStream rng(seed, stream);
            const FlightStream fs = generate_flight_stream(rng, T);
            const ExplorationResult x = explore(fs, r, T);
            const ZResult z = build_Z(fs, r, T);
            py::list events;
            for (const auto& e : x.events.records) {
                events.append(py::make_tuple(e.t, to_string(e.kind), e.flight_index));
            }
            py::dict d;
            d["Y"] = path_dict(build_Y(fs));
            d["Z"] = path_dict(z.path);
            d["X"] = path_dict(x.path);
            d["events"] = events;
            d["first_mismatch"] = x.first_mismatch ? py::cast(*x.first_mismatch) : py::none();
            return d;
        },
        py::arg("r"), py::arg("T"), py::arg("seed") = 20240611, py::arg("stream") = 0,
        "Y, Z and the exploration X driven by one flight stream, with the exploration's event log.");

    m.def(
        "event_probability",
        [](const std::string& kind, double r, std::uint64_t trials, std::uint64_t seed, int workers) {
            const auto k = parse_estimator_kind(kind);
            if (!k) {
                throw py::value_error("unknown event kind '" + kind + "'");
            }
            EventParams params;
            params.workers = workers;
            const EventEstimate e = estimate_event_probability(*k, r, trials, seed, params);
            py::dict d;
            d["estimate"] = e.ci.estimate;
            d["lo"] = e.ci.lo;
            d["hi"] = e.ci.hi;
            d["successes"] = e.ci.successes;
            d["trials"] = e.ci.trials;
            d["aborted"] = e.aborted;
            return d;
        },
        py::arg("kind"), py::arg("r"), py::arg("trials"), py::arg("seed") = 20240611, py::arg("workers") = 1);

    m.def(
        "middle_samples",
        [](double r, std::uint64_t n, std::uint64_t seed) {
            RngStream rng(seed, 0);
            std::uint64_t hat = 0;
            std::uint64_t tilde = 0;
            std::vector<double> beta;
            for (std::uint64_t i = 0; i < n; ++i) {
                const MiddleOutcome o = middle_segment_sample(rng, r);
                hat += o.in_A_hat ? 1 : 0;
                if (o.in_A_tilde) {
                    ++tilde;
                    beta.push_back(o.beta_tilde / r);
                }
            }
            py::dict d;
            d["hat"] = hat;
            d["tilde"] = tilde;
            d["beta_over_r"] = py::array_t<double>(static_cast<py::ssize_t>(beta.size()), beta.data());
            return d;
        },
        py::arg("r"), py::arg("n"), py::arg("seed") = 20240611);

    m.def("suite_names", &suite_names);
    m.def("suite_help", &suite_help);
    m.def(
        "run_suite",
        [](const py::dict& config) {
            const RunConfig cfg = config_from(config);
            SuiteResult res;
            {
                py::gil_scoped_release release;
                res = run_suite(cfg);
            }
            return suite_dict(res);
        },
        py::arg("config"));
}
