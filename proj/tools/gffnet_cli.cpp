// gffnet_cli.cpp — command-line front end.
//
// Direct operations (sample-field, resistance, walk-trace) plus one subcommand
// per registered experiment.  Global flags: --config, --seed, --replicas,
// --out, --tol, --threads.  Exit status is 0 iff every hard assertion of the
// invoked run passed.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gffnet/errors.hpp"
#include "gffnet/field.hpp"
#include "gffnet/harness.hpp"
#include "gffnet/measure.hpp"
#include "gffnet/network.hpp"
#include "gffnet/resistance.hpp"
#include "gffnet/rng.hpp"
#include "gffnet/walk.hpp"

namespace {

using namespace gffnet;

struct GlobalArgs {
    std::string config;
    std::uint64_t seed = 1;
    int replicas = 0;  // 0: keep the subcommand default
    std::string out;
    double tol = 0.0;
    int threads = 1;
};

void add_global_flags(CLI::App& app, GlobalArgs& g) {
    app.add_option("--config", g.config, "key=value config file");
    app.add_option("--seed", g.seed, "master seed (default 1)");
    app.add_option("--replicas", g.replicas, "replica count override");
    app.add_option("--out", g.out, "output directory for report/detail files");
    app.add_option("--tol", g.tol, "linear-solve tolerance override");
    app.add_option("--threads", g.threads, "worker threads (default 1)");
    app.fallthrough();
}

// Assemble the RunConfig in precedence order: experiment defaults, then the
// config file, then explicit command-line flags.
RunConfig assemble_config(const GlobalArgs& g, const CLI::App& root,
                          const std::string& experiment, int default_replicas,
                          const std::vector<std::pair<std::string, std::string>>& kv) {
    RunConfig cfg;
    cfg.experiment = experiment;
    cfg.replicas = default_replicas;
    if (!g.config.empty()) load_config_file(g.config, cfg);
    cfg.experiment = experiment;  // the subcommand always wins
    if (root.count("--seed") > 0) cfg.seed = g.seed;
    if (root.count("--replicas") > 0) cfg.replicas = g.replicas;
    if (root.count("--out") > 0) cfg.out_dir = g.out;
    if (root.count("--tol") > 0) cfg.tol = g.tol;
    if (root.count("--threads") > 0) cfg.threads = g.threads;
    for (const auto& [key, value] : kv) cfg.extra[key] = value;
    cfg.validate();
    return cfg;
}

int report_and_exit_code(const RunConfig& cfg, const RunResult& result) {
    for (const auto& a : result.assertions) {
        const char* kind = a.kind == Assertion::Kind::Hard        ? "hard"
                           : a.kind == Assertion::Kind::Statistical ? "stat"
                                                                    : "soft";
        std::printf("[%s] %-24s (%s) value=%.6g bound=%.6g  %s\n",
                    a.pass ? "PASS" : "FAIL", a.name.c_str(), kind, a.value,
                    a.bound, a.detail.c_str());
    }
    for (const auto& [key, value] : result.summary) {
        std::printf("  %-28s %.10g\n", key.c_str(), value);
    }
    write_outputs(cfg, result);
    if (!cfg.out_dir.empty()) {
        std::printf("wrote report.json and detail.csv under %s\n",
                    cfg.out_dir.c_str());
    }
    return result.passed() ? 0 : 1;
}

// Shared field/network builder for the direct subcommands.
struct BuildArgs {
    int n = 4;
    int zeta = 0;  // 0: default_zeta(n)
    double gamma = 0.2;
    std::vector<double> box;  // x0 y0 x1 y1; empty: self-dual rectangle
    std::string load_field;   // load a saved sample instead of sampling
    int kernel_m = 0;
    bool truncated = false;
    bool negate = false;
};

void add_build_flags(CLI::App& sub, BuildArgs& b) {
    sub.add_option("--n", b.n, "lattice scale index (default 4)");
    sub.add_option("--zeta", b.zeta, "mesh multiplier (default ceil(sqrt(n)))");
    sub.add_option("--gamma", b.gamma, "inverse-temperature gamma (default 0.2)");
    sub.add_option("--box", b.box, "box x0 y0 x1 y1 (default: self-dual rectangle)")
        ->expected(4);
    sub.add_option("--load-field", b.load_field,
                   "load a saved field (path prefix) instead of sampling");
    sub.add_option("--kernel-m", b.kernel_m, "lower band index m (default 0)");
    sub.add_flag("--truncated", b.truncated, "use the truncated kernel psi");
    sub.add_flag("--negate", b.negate, "negate the sample (dual-side field)");
}

Rect resolve_box(const BuildArgs& b, int zeta) {
    if (!b.box.empty()) return Rect{b.box[0], b.box[1], b.box[2], b.box[3]};
    const long long units = (1LL << b.n) * zeta;
    if (units % 4 != 0) {
        throw ConfigError("default box needs 2^n * zeta divisible by 4; pass --box");
    }
    const double s = std::ldexp(1.0, -b.n) / zeta;
    const double k = static_cast<double>(units / 4);
    return Rect{0.0, 0.0, (k + 1.0) * s, k * s};
}

FieldSample obtain_field(const BuildArgs& b, const GlobalArgs& g) {
    if (!b.load_field.empty()) return load_field(b.load_field);
    const int zeta = b.zeta > 0 ? b.zeta : default_zeta(b.n);
    GridSpec grid;
    grid.n = b.n;
    grid.zeta = zeta;
    grid.box = resolve_box(b, zeta);
    KernelSpec kernel;
    kernel.m = b.kernel_m;
    kernel.n = b.n;
    kernel.kind = b.truncated ? KernelKind::Truncated : KernelKind::Full;
    return sample_field(grid, kernel, g.seed, b.negate);
}

std::ofstream open_out_file(const GlobalArgs& g, const std::string& name) {
    std::filesystem::path path(name);
    if (!g.out.empty()) {
        std::filesystem::create_directories(g.out);
        path = std::filesystem::path(g.out) / name;
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    std::printf("writing %s\n", path.string().c_str());
    return out;
}

// ---------------------------------------------------------------------------

int cmd_sample_field(const BuildArgs& b, const GlobalArgs& g,
                     const std::string& prefix) {
    const FieldSample sample = obtain_field(b, g);
    std::string full = prefix;
    if (!g.out.empty()) {
        std::filesystem::create_directories(g.out);
        full = (std::filesystem::path(g.out) / prefix).string();
    }
    save_field(sample, full);
    std::printf("saved %s.meta and %s.f64 (%lld x %lld values, spacing %.9g)\n",
                full.c_str(), full.c_str(), sample.nx, sample.ny,
                sample.spacing());
    return 0;
}

std::vector<int> parse_vertex_list(const std::string& text) {
    std::vector<int> out;
    std::istringstream in(text);
    std::string token;
    while (std::getline(in, token, ',')) {
        out.push_back(static_cast<int>(std::stoll(token)));
    }
    return out;
}

int cmd_resistance(const BuildArgs& b, const GlobalArgs& g,
                   const std::string& load_net, const std::string& save_net,
                   const std::string& terminals_kind, const std::string& source,
                   const std::string& sink) {
    Network net;
    if (!load_net.empty()) {
        net = load_network(load_net);
    } else {
        const FieldSample sample = obtain_field(b, g);
        const int zeta = b.zeta > 0 ? b.zeta : default_zeta(b.n);
        Rect box = b.box.empty() ? resolve_box(b, zeta)
                                 : Rect{b.box[0], b.box[1], b.box[2], b.box[3]};
        net = build_network(sample, b.gamma, box);
    }
    if (!save_net.empty()) {
        save_network(net, save_net);
        std::printf("saved network to %s (%d vertices, %d edges)\n",
                    save_net.c_str(), net.vertex_count(), net.edge_count());
    }

    Terminals t;
    if (!source.empty() || !sink.empty()) {
        if (source.empty() || sink.empty()) {
            throw ConfigError("--source and --sink must be given together");
        }
        t.a = parse_vertex_list(source);
        t.z = parse_vertex_list(sink);
    } else if (terminals_kind == "lr") {
        t = left_right(net);
    } else if (terminals_kind == "ud") {
        t = up_down(net);
    } else {
        throw ConfigError("--terminals must be lr or ud");
    }

    SolveOptions opts;
    if (g.tol > 0.0) opts.tol = g.tol;
    const SolveResult res = solve_two_terminal(net, t, opts);
    std::printf("vertices   %d\n", net.vertex_count());
    std::printf("edges      %d\n", net.edge_count());
    std::printf("R          %.12g\n", res.resistance);
    std::printf("conductance %.12g\n", res.conductance);
    std::printf("energy     %.12g\n", res.energy);
    std::printf("solver     %s  iterations %d  residual %.3g\n",
                res.used_direct ? "direct" : "cg", res.iterations, res.residual);
    return 0;
}

int cmd_walk_trace(const BuildArgs& b, const GlobalArgs& g, double radius,
                   long long measure_samples) {
    const int zeta = b.zeta > 0 ? b.zeta : default_zeta(b.n);
    const double s = std::ldexp(1.0, -b.n) / zeta;
    BuildArgs local = b;
    if (local.box.empty()) {
        const Rect box = Rect::centered(radius + s, radius + s);
        local.box = {box.x0, box.y0, box.x1, box.y1};
    }
    const FieldSample sample = obtain_field(local, g);
    const Rect box{local.box[0], local.box[1], local.box[2], local.box[3]};
    const Network net = build_network(sample, local.gamma, box);

    std::vector<int> domain;
    const double tol = 1e-6 * net.lattice.spacing;
    for (int v = 0; v < net.vertex_count(); ++v) {
        const Vec2 p = net.coords[static_cast<std::size_t>(v)];
        if (std::max(std::abs(p.x), std::abs(p.y)) <= radius + tol) {
            domain.push_back(v);
        }
    }
    int start = -1;
    for (int v : domain) {
        const Vec2 p = net.coords[static_cast<std::size_t>(v)];
        if (std::abs(p.x) <= tol && std::abs(p.y) <= tol) start = v;
    }
    if (start < 0) throw ConfigError("origin is not a lattice vertex of this box");

    const WalkContext ctx(net, domain);
    Rng rng(mix_seed(g.seed, 0x77a1c57eu));
    const ExitRecord rec = simulate_until_exit(ctx, start, rng, /*keep_trace=*/true);
    {
        std::ofstream out = open_out_file(g, "trace.txt");
        for (std::size_t i = 0; i < rec.trace.size(); ++i) {
            const Vec2 p = net.coords[static_cast<std::size_t>(rec.trace[i])];
            out << i << ' ' << p.x << ' ' << p.y << '\n';
        }
    }
    std::printf("trace: %lld steps, exit vertex %d\n", rec.steps, rec.exit_vertex);

    if (measure_samples > 0) {
        const ExitMeasure em =
            exit_measure(ctx, StartSpec::vertex(start), measure_samples,
                         mix_seed(g.seed, 0x6d656173u));
        std::ofstream out = open_out_file(g, "exit_measure.csv");
        out << "vertex_index,x,y,count,frequency\n";
        char buf[160];
        for (std::size_t i = 0; i < em.exit_vertices.size(); ++i) {
            const int v = em.exit_vertices[i];
            const Vec2 p = net.coords[static_cast<std::size_t>(v)];
            std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%lld,%.17g\n", v, p.x,
                          p.y, em.counts[i], em.frequency[i]);
            out << buf;
        }
        std::printf("exit measure: %lld samples, mean steps %.6g (se %.3g)\n",
                    em.samples, em.mean_steps, em.mean_steps_se);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gffnet: resistance networks in a log-correlated environment"};
    app.require_subcommand(1);
    GlobalArgs g;
    add_global_flags(app, g);

    // --- direct operations ---------------------------------------------------
    BuildArgs sf_args;
    std::string sf_prefix = "field";
    CLI::App* sf = app.add_subcommand("sample-field", "sample and save one field");
    add_build_flags(*sf, sf_args);
    sf->add_option("--prefix", sf_prefix, "output path prefix (default 'field')");

    BuildArgs res_args;
    std::string res_load_net, res_save_net, res_terminals = "lr";
    std::string res_source, res_sink;
    CLI::App* rs = app.add_subcommand("resistance",
                                      "solve a two-terminal crossing resistance");
    add_build_flags(*rs, res_args);
    rs->add_option("--load-network", res_load_net, "edge-list network file");
    rs->add_option("--save-network", res_save_net, "write the network edge list");
    rs->add_option("--terminals", res_terminals, "lr or ud (default lr)");
    rs->add_option("--source", res_source, "explicit source vertices (comma list)");
    rs->add_option("--sink", res_sink, "explicit sink vertices (comma list)");

    BuildArgs wt_args;
    wt_args.n = 3;
    double wt_radius = 0.25;
    long long wt_measure = 0;
    CLI::App* wt = app.add_subcommand(
        "walk-trace", "simulate one walk to the exit and write its trace");
    add_build_flags(*wt, wt_args);
    wt->add_option("--radius", wt_radius, "domain half-width (default 0.25)");
    wt->add_option("--measure-samples", wt_measure,
                   "also write an exit-measure CSV over this many walks");

    // --- registered experiments ----------------------------------------------
    struct ExperimentCmd {
        const char* command;
        const char* registry_name;
        int default_replicas;
        bool gamma_required;
        const char* help;
    };
    const std::vector<ExperimentCmd> experiment_cmds = {
        {"duality-check", "duality-median", 2000, false,
         "P(R <= 1) on the self-dual rectangle"},
        {"quantiles", "quantile-table", 500, true,
         "crossing-resistance quantiles and Lambda-hat across scales"},
        {"mesh-compare", "mesh-compare", 500, false,
         "|log R_zeta - log R_zeta'| on a shared realization"},
        {"annulus-ratio", "annulus-ratio", 200, false,
         "around/across resistances of a fixed annulus"},
        {"exit-time", "exit-time-scaling", 20, true,
         "log(E tau / chi_n) medians across scales"},
        {"lqg-moments", "lqg-moments", 2000, false,
         "normalized eta moments (gamma defaults to 0.3)"},
        {"identity-suite", "identity-suite", 200, false,
         "per-sample exact identities on random instances"},
        {"walk-consistency", "walk-consistency", 1, false,
         "Monte Carlo walk statistics vs exact solves"},
    };

    struct ExperimentArgs {
        std::vector<std::string> sets;
        double gamma = std::numeric_limits<double>::quiet_NaN();
    };
    std::vector<ExperimentArgs> exp_args(experiment_cmds.size());
    std::vector<CLI::App*> exp_subs(experiment_cmds.size());
    for (std::size_t i = 0; i < experiment_cmds.size(); ++i) {
        const ExperimentCmd& ec = experiment_cmds[i];
        CLI::App* sub = app.add_subcommand(ec.command, ec.help);
        auto* gamma_opt = sub->add_option("--gamma", exp_args[i].gamma,
                                          "inverse-temperature gamma");
        if (ec.gamma_required) gamma_opt->required();
        sub->add_option("--set", exp_args[i].sets,
                        "extra key=value option (repeatable)");
        exp_subs[i] = sub;
    }

    CLI11_PARSE(app, argc, argv);

    try {
        if (sf->parsed()) return cmd_sample_field(sf_args, g, sf_prefix);
        if (rs->parsed()) {
            return cmd_resistance(res_args, g, res_load_net, res_save_net,
                                  res_terminals, res_source, res_sink);
        }
        if (wt->parsed()) return cmd_walk_trace(wt_args, g, wt_radius, wt_measure);

        for (std::size_t i = 0; i < experiment_cmds.size(); ++i) {
            if (!exp_subs[i]->parsed()) continue;
            std::vector<std::pair<std::string, std::string>> kv;
            if (!std::isnan(exp_args[i].gamma)) {
                kv.emplace_back("gamma", std::to_string(exp_args[i].gamma));
            }
            for (const std::string& s : exp_args[i].sets) {
                const auto eq = s.find('=');
                if (eq == std::string::npos) {
                    throw ConfigError("--set expects key=value, got '" + s + "'");
                }
                kv.emplace_back(s.substr(0, eq), s.substr(eq + 1));
            }
            const RunConfig cfg =
                assemble_config(g, app, experiment_cmds[i].registry_name,
                                experiment_cmds[i].default_replicas, kv);
            const RunResult result = run_experiment(cfg);
            return report_and_exit_code(cfg, result);
        }
        std::fprintf(stderr, "no subcommand matched\n");
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
