// gffnet_py.cpp — python bindings for the main operations: field sampling,
// network construction, resistance solves, measures, and walk simulation.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <cstdint>
#include <vector>

#include "gffnet/field.hpp"
#include "gffnet/harness.hpp"
#include "gffnet/measure.hpp"
#include "gffnet/network.hpp"
#include "gffnet/resistance.hpp"
#include "gffnet/rng.hpp"
#include "gffnet/walk.hpp"

namespace py = pybind11;
using namespace gffnet;

namespace {

Rect rect_from(const std::array<double, 4>& b) {
    return Rect{b[0], b[1], b[2], b[3]};
}

GridSpec grid_from(int n, int zeta, const std::array<double, 4>& box,
                   bool zeta_override) {
    GridSpec grid;
    grid.n = n;
    grid.zeta = zeta > 0 ? zeta : default_zeta(n);
    grid.box = rect_from(box);
    grid.zeta_override = zeta_override;
    return grid;
}

Terminals terminals_from(const Network& net, const std::string& which) {
    if (which == "lr") return left_right(net);
    if (which == "ud") return up_down(net);
    if (which == "supernodes") return supernode_terminals(net);
    throw ConfigError("terminals must be 'lr', 'ud', or 'supernodes'");
}

py::array_t<double> values_array(const FieldSample& s) {
    py::array_t<double> arr({static_cast<py::ssize_t>(s.ny),
                             static_cast<py::ssize_t>(s.nx)});
    auto buf = arr.mutable_unchecked<2>();
    for (py::ssize_t j = 0; j < buf.shape(0); ++j) {
        for (py::ssize_t i = 0; i < buf.shape(1); ++i) {
            buf(j, i) = s.values[static_cast<std::size_t>(j * s.nx + i)];
        }
    }
    return arr;
}

py::array_t<double> coords_array(const Network& net) {
    py::array_t<double> arr({static_cast<py::ssize_t>(net.coords.size()),
                             static_cast<py::ssize_t>(2)});
    auto buf = arr.mutable_unchecked<2>();
    for (py::ssize_t v = 0; v < buf.shape(0); ++v) {
        buf(v, 0) = net.coords[static_cast<std::size_t>(v)].x;
        buf(v, 1) = net.coords[static_cast<std::size_t>(v)].y;
    }
    return arr;
}

}  // namespace

PYBIND11_MODULE(gffnet, m) {
    m.doc() = "Resistance networks in a log-correlated lattice environment";

    py::register_exception<Error>(m, "GffnetError");

    py::class_<FieldSample>(m, "FieldSample")
        .def_readonly("seed", &FieldSample::seed)
        .def_readonly("nx", &FieldSample::nx)
        .def_readonly("ny", &FieldSample::ny)
        .def("spacing", &FieldSample::spacing)
        .def_property_readonly("values", &values_array,
                               "sampled values, shape (ny, nx), row j = y index")
        .def("value_at",
             [](const FieldSample& s, double x, double y) {
                 return s.value_at(Vec2{x, y});
             },
             py::arg("x"), py::arg("y"));

    py::class_<Network>(m, "Network")
        .def("vertex_count", &Network::vertex_count)
        .def("edge_count", &Network::edge_count)
        .def_readonly("provenance", &Network::provenance)
        .def_property_readonly("coords", &coords_array)
        .def_property_readonly("edges", [](const Network& net) {
            std::vector<std::tuple<int, int, double>> out;
            out.reserve(net.edges.size());
            for (const NetEdge& e : net.edges) {
                out.emplace_back(e.u, e.v, e.log_r);
            }
            return out;
        });

    py::class_<MeasureReport>(m, "MeasureReport")
        .def_readonly("raw", &MeasureReport::raw)
        .def_readonly("normalized", &MeasureReport::normalized)
        .def_readonly("expectation", &MeasureReport::expectation);

    m.def(
        "analytic_covariance",
        [](double x0, double y0, double x1, double y1, int m_lo, int n_hi) {
            return analytic_covariance(Vec2{x0, y0}, Vec2{x1, y1}, m_lo, n_hi);
        },
        py::arg("x0"), py::arg("y0"), py::arg("x1"), py::arg("y1"), py::arg("m"),
        py::arg("n"), "band covariance C_{m,n}(x, y) of the white-noise field");

    m.def(
        "sample_field",
        [](int n, const std::array<double, 4>& box, std::uint64_t seed, int zeta,
           int m, bool truncated, bool negate, bool zeta_override) {
            KernelSpec kernel;
            kernel.m = m;
            kernel.n = n;
            kernel.kind = truncated ? KernelKind::Truncated : KernelKind::Full;
            return sample_field(grid_from(n, zeta, box, zeta_override), kernel,
                                seed, negate);
        },
        py::arg("n"), py::arg("box"), py::arg("seed"), py::arg("zeta") = 0,
        py::arg("m") = 0, py::arg("truncated") = false, py::arg("negate") = false,
        py::arg("zeta_override") = false,
        "sample the band field on the refined lattice covering `box`");

    m.def(
        "build_network",
        [](const FieldSample& sample, double gamma,
           const std::array<double, 4>& box, int zeta) {
            return build_network(sample, gamma, rect_from(box), zeta);
        },
        py::arg("sample"), py::arg("gamma"), py::arg("box"), py::arg("zeta") = 0,
        "nearest-neighbor network with log r_e = gamma * field(midpoint)");

    m.def("dual_network", &dual_network, py::arg("net"));

    m.def(
        "effective_resistance",
        [](const Network& net, const std::string& terminals, double tol) {
            SolveOptions opts;
            if (tol > 0.0) opts.tol = tol;
            return effective_resistance(net, terminals_from(net, terminals), opts);
        },
        py::arg("net"), py::arg("terminals") = "lr", py::arg("tol") = 0.0);

    m.def(
        "solve_two_terminal",
        [](const Network& net, const std::string& terminals, double tol) {
            SolveOptions opts;
            if (tol > 0.0) opts.tol = tol;
            const SolveResult res =
                solve_two_terminal(net, terminals_from(net, terminals), opts);
            py::dict out;
            out["resistance"] = res.resistance;
            out["conductance"] = res.conductance;
            out["energy"] = res.energy;
            out["iterations"] = res.iterations;
            out["residual"] = res.residual;
            out["potential"] = res.potential;
            out["current"] = res.current;
            return out;
        },
        py::arg("net"), py::arg("terminals") = "lr", py::arg("tol") = 0.0);

    m.def(
        "eta_measure",
        [](const FieldSample& sample, double gamma,
           const std::array<double, 4>& box, int zeta) {
            return eta_measure(sample, gamma, rect_from(box), zeta);
        },
        py::arg("sample"), py::arg("gamma"), py::arg("box"), py::arg("zeta") = 0,
        "LQG-type vertex measure eta(B) with its normalization");

    m.def(
        "exact_exit_expectation",
        [](const Network& net, const std::vector<int>& domain, int start) {
            return exact_exit_expectation(net, domain, start);
        },
        py::arg("net"), py::arg("domain"), py::arg("start"));

    m.def(
        "walk_trace",
        [](const Network& net, const std::vector<int>& domain, int start,
           std::uint64_t seed) {
            const WalkContext ctx(net, domain);
            Rng rng(seed);
            const ExitRecord rec =
                simulate_until_exit(ctx, start, rng, /*keep_trace=*/true);
            py::array_t<double> arr({static_cast<py::ssize_t>(rec.trace.size()),
                                     static_cast<py::ssize_t>(2)});
            auto buf = arr.mutable_unchecked<2>();
            for (py::ssize_t i = 0; i < buf.shape(0); ++i) {
                const Vec2 p =
                    net.coords[static_cast<std::size_t>(rec.trace[static_cast<std::size_t>(i)])];
                buf(i, 0) = p.x;
                buf(i, 1) = p.y;
            }
            return arr;
        },
        py::arg("net"), py::arg("domain"), py::arg("start"), py::arg("seed"),
        "one walk to the exit; returns the trace coordinates, shape (steps+1, 2)");

    m.def("chi_factor", &chi_factor, py::arg("n"), py::arg("zeta"),
          py::arg("gamma"));
    m.def("mix_seed", py::overload_cast<std::uint64_t, std::uint64_t>(&mix_seed),
          py::arg("master"), py::arg("index"));
    m.def("default_zeta", &default_zeta, py::arg("n"));

    m.def("save_field", &save_field, py::arg("sample"), py::arg("path_prefix"));
    m.def("load_field", &load_field, py::arg("path_prefix"));
    m.def("save_network", &save_network, py::arg("net"), py::arg("path"));
    m.def("load_network", &load_network, py::arg("path"));

    m.def(
        "run_experiment",
        [](const std::string& name, std::uint64_t seed, int replicas,
           const std::map<std::string, std::string>& extra,
           const std::string& out_dir) {
            RunConfig cfg;
            cfg.experiment = name;
            cfg.seed = seed;
            cfg.replicas = replicas;
            cfg.extra = extra;
            cfg.out_dir = out_dir;
            cfg.validate();
            const RunResult result = run_experiment(cfg);
            write_outputs(cfg, result);
            py::list assertions;
            for (const auto& a : result.assertions) {
                py::dict d;
                d["name"] = a.name;
                d["pass"] = a.pass;
                d["value"] = a.value;
                d["bound"] = a.bound;
                d["detail"] = a.detail;
                assertions.append(d);
            }
            py::dict out;
            out["experiment"] = result.experiment.empty() ? name : result.experiment;
            out["passed"] = result.passed();
            out["assertions"] = assertions;
            py::dict summary;
            for (const auto& [key, value] : result.summary) {
                summary[py::str(key)] = value;
            }
            out["summary"] = summary;
            return out;
        },
        py::arg("name"), py::arg("seed") = 1, py::arg("replicas") = 1,
        py::arg("extra") = std::map<std::string, std::string>{},
        py::arg("out_dir") = std::string{});
}
