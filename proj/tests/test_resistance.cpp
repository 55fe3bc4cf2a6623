// test_resistance.cpp — solver oracles on hand-built networks, exact identity
// checks, max-flow, path decompositions, Green functions, and the resdif gap.

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <tuple>
#include <vector>

#include "doctest.h"
#include "gffnet/errors.hpp"
#include "gffnet/field.hpp"
#include "gffnet/maxflow.hpp"
#include "gffnet/network.hpp"
#include "gffnet/resistance.hpp"
#include "gffnet/rng.hpp"

using namespace gffnet;

namespace {

Network make_net(int nv, const std::vector<std::tuple<int, int, double>>& edges) {
    Network net;
    net.coords.resize(static_cast<std::size_t>(nv));
    for (const auto& [u, v, r] : edges) {
        NetEdge e;
        e.u = u;
        e.v = v;
        e.log_r = std::log(r);
        net.edges.push_back(e);
    }
    net.provenance = "test";
    return net;
}

Network unit_path(int n_edges) {
    std::vector<std::tuple<int, int, double>> edges;
    for (int i = 0; i < n_edges; ++i) edges.emplace_back(i, i + 1, 1.0);
    return make_net(n_edges + 1, edges);
}

Network lattice_net(int n, int zeta, Rect box, double gamma, std::uint64_t seed) {
    GridSpec g;
    g.n = n;
    g.zeta = zeta;
    g.box = box;
    return build_network(sample_field(g, KernelSpec{0, n}, seed), gamma, box);
}

// Independent min-cut oracle: minimum capacity over all disconnecting edge
// subsets (exponential; instances are kept tiny).
double exhaustive_min_cut(const Network& net, const Terminals& t,
                          const std::vector<double>& caps) {
    const int ne = net.edge_count();
    const int nv = net.vertex_count();
    double best = std::numeric_limits<double>::infinity();
    std::vector<char> sink(static_cast<std::size_t>(nv), 0);
    for (int z : t.z) sink[static_cast<std::size_t>(z)] = 1;
    for (unsigned mask = 0; mask < (1u << ne); ++mask) {
        double capsum = 0.0;
        for (int e = 0; e < ne; ++e) {
            if (mask & (1u << e)) capsum += caps[static_cast<std::size_t>(e)];
        }
        if (capsum >= best) continue;
        std::vector<char> seen(static_cast<std::size_t>(nv), 0);
        std::queue<int> q;
        for (int a : t.a) {
            seen[static_cast<std::size_t>(a)] = 1;
            q.push(a);
        }
        bool reached = false;
        while (!q.empty() && !reached) {
            const int v = q.front();
            q.pop();
            for (int e = 0; e < ne && !reached; ++e) {
                if (mask & (1u << e)) continue;
                const NetEdge& edge = net.edges[static_cast<std::size_t>(e)];
                int w = -1;
                if (edge.u == v) w = edge.v;
                if (edge.v == v) w = edge.u;
                if (w < 0 || seen[static_cast<std::size_t>(w)]) continue;
                if (sink[static_cast<std::size_t>(w)]) reached = true;
                seen[static_cast<std::size_t>(w)] = 1;
                q.push(w);
            }
        }
        if (!reached) best = capsum;
    }
    return best;
}

}  // namespace

TEST_CASE("series path of unit resistors") {
    const Network net = unit_path(4);
    const SolveResult res = solve_two_terminal(net, Terminals{{0}, {4}});
    CHECK(res.resistance == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(res.conductance == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(res.resistance * res.conductance == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(res.energy == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(res.max_divergence <= 1e-12);
    CHECK(res.strength_mismatch <= 1e-12);
    for (double i : res.current) CHECK(std::abs(i) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dirichlet_energy(net, res.current) ==
          doctest::Approx(res.resistance).epsilon(1e-12));
}

TEST_CASE("triangle oracle: 12/7") {
    const Network net = make_net(3, {{0, 1, 1.0}, {1, 2, 2.0}, {0, 2, 4.0}});
    CHECK(effective_resistance(net, Terminals{{0}, {2}}) ==
          doctest::Approx(12.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("cycle oracle: k(N-k)/N") {
    std::vector<std::tuple<int, int, double>> edges;
    for (int i = 0; i < 8; ++i) edges.emplace_back(i, (i + 1) % 8, 1.0);
    const Network net = make_net(8, edges);
    CHECK(effective_resistance(net, Terminals{{0}, {3}}) ==
          doctest::Approx(3.0 * 5.0 / 8.0).epsilon(1e-12));
}

TEST_CASE("per-edge Ohm law links the two stored frames") {
    // potential is the unit-potential solve (1 on A, 0 on Z); current is the
    // unit-strength flow, so Ohm's law carries a factor R between them.
    const Network net = make_net(3, {{0, 1, 1.0}, {1, 2, 2.0}, {0, 2, 4.0}});
    const SolveResult res = solve_two_terminal(net, Terminals{{0}, {2}});
    CHECK(res.potential[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res.potential[2] == doctest::Approx(0.0).epsilon(1e-12));
    for (int e = 0; e < net.edge_count(); ++e) {
        const NetEdge& edge = net.edges[static_cast<std::size_t>(e)];
        const double drop = res.potential[static_cast<std::size_t>(edge.u)] -
                            res.potential[static_cast<std::size_t>(edge.v)];
        CHECK(res.current[static_cast<std::size_t>(e)] * edge.resistance() ==
              doctest::Approx(drop * res.resistance).epsilon(1e-12));
    }
}

TEST_CASE("supernode terminals contract whole vertex groups") {
    // Two parallel two-edge paths between the groups {0,1} and {4,5}.
    const Network net = make_net(
        6, {{0, 2, 1.0}, {2, 4, 1.0}, {1, 3, 1.0}, {3, 5, 1.0}});
    CHECK(effective_resistance(net, Terminals{{0, 1}, {4, 5}}) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("disconnected terminals raise SolveError") {
    const Network net = make_net(4, {{0, 1, 1.0}, {2, 3, 1.0}});
    CHECK_THROWS_AS(effective_resistance(net, Terminals{{0}, {3}}),
                    const SolveError&);
}

TEST_CASE("forced iterative solves agree with the direct route") {
    const double s = std::ldexp(1.0, -2) / 2;
    const Network net = lattice_net(2, 2, Rect{0.0, 0.0, 4 * s, 3 * s}, 0.2, 7);
    const Terminals t = left_right(net);
    SolveOptions direct;
    SolveOptions iterative;
    iterative.force_iterative = true;
    const SolveResult rd = solve_two_terminal(net, t, direct);
    const SolveResult ri = solve_two_terminal(net, t, iterative);
    CHECK(rd.used_direct);
    CHECK_FALSE(ri.used_direct);
    CHECK(rd.resistance == doctest::Approx(ri.resistance).epsilon(1e-8));
}

TEST_CASE("hitting probability on the unit path") {
    const Network net = unit_path(3);
    CHECK(hitting_probability(net, 1, {0}, {3}) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(hitting_probability(net, 2, {0}, {3}) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK_THROWS_AS(hitting_probability(net, 1, {1}, {3}), const ConfigError&);
}

TEST_CASE("hitting probability with set terminals matches the potential route") {
    // A = one interior vertex, Z = the whole boundary ring: the resistance
    // formula must see each set contracted in all three solves, which the
    // direct harmonic potential (1 on A, 0 on Z) checks independently.
    const double s = std::ldexp(1.0, -3) / 2;
    const Rect box{0.0, 0.0, 8 * s, 8 * s};
    const Network net = lattice_net(3, 2, box, 0.2, 907);
    const LatticeInfo& lat = net.lattice;
    const int start = static_cast<int>(lat.vertex(4, 4));
    const int a = static_cast<int>(lat.vertex(2, 4));
    std::vector<int> z;
    for (long long iy = 0; iy < lat.ny; ++iy) {
        for (long long ix = 0; ix < lat.nx; ++ix) {
            if (ix == 0 || iy == 0 || ix + 1 == lat.nx || iy + 1 == lat.ny) {
                z.push_back(static_cast<int>(lat.vertex(ix, iy)));
            }
        }
    }
    const double p = hitting_probability(net, start, {a}, z);
    const SolveResult sr = solve_two_terminal(net, Terminals{{a}, z});
    CHECK(p == doctest::Approx(sr.potential[static_cast<std::size_t>(start)])
                   .epsilon(1e-8));
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
}

TEST_CASE("green function oracles on the unit path") {
    const Network net = unit_path(4);
    const std::vector<int> domain{1, 2, 3};
    CHECK(green_function(net, domain, 2, 2) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(green_function(net, domain, 2, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(green_function(net, domain, 1, 1) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(green_function(net, domain, 1, 3) ==
          doctest::Approx(green_function(net, domain, 3, 1)).epsilon(1e-12));
    CHECK(green_function(net, domain, 0, 2) == 0.0);  // x outside the domain

    const std::vector<double> row = green_row(net, domain, 2);
    REQUIRE(row.size() == 5);
    CHECK(row[0] == 0.0);
    CHECK(row[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(row[2] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(row[3] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(row[4] == 0.0);
}

TEST_CASE("green row agrees with the resistance formula on a random net") {
    const double s = std::ldexp(1.0, -2) / 2;
    const Network net = lattice_net(2, 2, Rect{0.0, 0.0, 4 * s, 4 * s}, 0.2, 17);
    std::vector<int> domain;
    for (int v = 0; v < net.vertex_count(); ++v) {
        const Vec2 p = net.coords[static_cast<std::size_t>(v)];
        const bool boundary = p.x == 0.0 || p.y == 0.0 ||
                              std::abs(p.x - 4 * s) < 1e-12 ||
                              std::abs(p.y - 4 * s) < 1e-12;
        if (!boundary) domain.push_back(v);
    }
    const int x = domain[4];
    const std::vector<double> row = green_row(net, domain, x);
    for (int y : domain) {
        CHECK(std::abs(row[static_cast<std::size_t>(y)] -
                       green_function(net, domain, x, y)) <= 1e-8);
    }
}

TEST_CASE("exit expectations on the unit path") {
    const Network net = unit_path(4);
    const std::vector<int> domain{1, 2, 3};
    CHECK(exact_exit_expectation(net, domain, 2) ==
          doctest::Approx(4.0).epsilon(1e-12));
    CHECK(exact_exit_expectation(net, domain, 1) ==
          doctest::Approx(3.0).epsilon(1e-12));
    CHECK(exact_exit_expectation(net, domain, 0) == 0.0);  // already outside
    const auto measure = harmonic_exit_measure(net, domain, 2);
    REQUIRE(measure.size() == 2);
    CHECK(measure[0].first == 0);
    CHECK(measure[0].second == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(measure[1].first == 4);
    CHECK(measure[1].second == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("max flow equals min cut on the diamond") {
    Network net = make_net(
        4, {{0, 1, 1.0}, {0, 2, 1.0}, {1, 3, 1.0}, {2, 3, 1.0}, {1, 2, 1.0}});
    const std::vector<double> caps{1.0, 1.0, 1.0, 1.0, 5.0};
    const MaxFlowResult mf = max_flow(net, Terminals{{0}, {3}}, caps);
    CHECK(mf.value == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(mf.cut_capacity == doctest::Approx(mf.value).epsilon(1e-12));
    CHECK(!mf.cut_edges.empty());
}

TEST_CASE("max flow matches the exhaustive min cut on random instances") {
    Rng rng(424242);
    for (int inst = 0; inst < 40; ++inst) {
        const int nv = 4 + static_cast<int>(rng.below(3));  // 4..6 vertices
        std::vector<std::tuple<int, int, double>> edges;
        std::set<std::pair<int, int>> used;
        // spanning path first so the instance is connected
        for (int v = 0; v + 1 < nv; ++v) {
            edges.emplace_back(v, v + 1, 1.0);
            used.insert({v, v + 1});
        }
        const int extra = static_cast<int>(rng.below(
            static_cast<std::uint64_t>(12 - (nv - 1))));
        for (int k = 0; k < extra; ++k) {
            const int u = static_cast<int>(rng.below(static_cast<std::uint64_t>(nv)));
            const int v = static_cast<int>(rng.below(static_cast<std::uint64_t>(nv)));
            const auto key = std::minmax(u, v);
            if (u == v || used.count({key.first, key.second})) continue;
            used.insert({key.first, key.second});
            edges.emplace_back(u, v, 1.0);
        }
        const Network net = make_net(nv, edges);
        std::vector<double> caps(net.edges.size());
        for (auto& c : caps) c = 0.5 + rng.uniform();
        const Terminals t{{0}, {nv - 1}};
        const MaxFlowResult mf = max_flow(net, t, caps);
        const double brute = exhaustive_min_cut(net, t, caps);
        CHECK(std::abs(mf.value - brute) <= 1e-9 * std::max(1.0, mf.value));
        CHECK(std::abs(mf.value - mf.cut_capacity) <=
              1e-9 * std::max(1.0, mf.value));
    }
}

TEST_CASE("current through a separating set carries the full strength") {
    const Network path = unit_path(4);
    const SolveResult res = solve_two_terminal(path, Terminals{{0}, {4}});
    CHECK(current_through_set(path, res, {2}) ==
          doctest::Approx(1.0).epsilon(1e-10));

    // two parallel branches: the share of each branch is its conductance share
    const Network par = make_net(2, {{0, 1, 1.0}, {0, 1, 3.0}});
    const SolveResult rp = solve_two_terminal(par, Terminals{{0}, {1}});
    CHECK(current_through_set(par, rp, {0}) ==
          doctest::Approx(0.75).epsilon(1e-10));
    CHECK(current_through_set(par, rp, {1}) ==
          doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("path decomposition reconstructs the flow") {
    const double s = std::ldexp(1.0, -2) / 2;
    const Network net = lattice_net(2, 2, Rect{0.0, 0.0, 4 * s, 3 * s}, 0.2, 23);
    const Terminals t = left_right(net);
    const SolveResult res = solve_two_terminal(net, t);
    const WeightedPathSet paths = path_decomposition(net, res);

    REQUIRE(!paths.paths.empty());
    CHECK(paths.residual_strength <= 1e-9);
    double alpha = 0.0, energy = 0.0;
    std::set<int> sources(t.a.begin(), t.a.end());
    std::set<int> sinks(t.z.begin(), t.z.end());
    for (const auto& p : paths.paths) {
        CHECK(p.weight > 0.0);
        REQUIRE(!p.vertices.empty());
        CHECK(sources.count(p.vertices.front()) == 1);
        CHECK(sinks.count(p.vertices.back()) == 1);
        REQUIRE(p.split_r.size() == p.edge_ids.size());
        double r_path = 0.0;
        for (double r : p.split_r) {
            CHECK(r > 0.0);
            r_path += r;
        }
        alpha += p.weight;
        energy += p.weight * p.weight * r_path;
    }
    CHECK(std::abs(alpha - 1.0) <= 1e-12);
    CHECK(energy == doctest::Approx(res.resistance).epsilon(1e-6));
}

TEST_CASE("deleting an edge never lowers the resistance") {
    const double s = std::ldexp(1.0, -2) / 2;
    const Network net = lattice_net(2, 2, Rect{0.0, 0.0, 3 * s, 3 * s}, 0.3, 29);
    const Terminals t = left_right(net);
    const double base = effective_resistance(net, t);
    Rng rng(3131);
    for (int k = 0; k < 50; ++k) {
        const int drop = static_cast<int>(
            rng.below(static_cast<std::uint64_t>(net.edge_count())));
        std::vector<int> kept;
        for (int e = 0; e < net.edge_count(); ++e) {
            if (e != drop) kept.push_back(e);
        }
        double r = std::numeric_limits<double>::infinity();
        try {
            r = effective_resistance(edge_subnetwork(net, kept), t);
        } catch (const SolveError&) {
            // deleting a bridge: infinite resistance, trivially monotone
        }
        CHECK(r >= base * (1.0 - 1e-9));
    }
}

TEST_CASE("series and parallel laws are exact") {
    const Network series = make_net(3, {{0, 1, 1.5}, {1, 2, 2.5}});
    CHECK(effective_resistance(series, Terminals{{0}, {2}}) ==
          doctest::Approx(4.0).epsilon(1e-12));
    const Network parallel = make_net(2, {{0, 1, 2.0}, {0, 1, 3.0}});
    CHECK(effective_resistance(parallel, Terminals{{0}, {1}}) ==
          doctest::Approx(1.2).epsilon(1e-12));
}

TEST_CASE("resdif gap bound holds on annulus instances") {
    const double s = std::ldexp(1.0, -2) / 2;
    const Rect box{0.0, 0.0, 6 * s, 6 * s};
    const Vec2 center{3 * s, 3 * s};
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
        for (double gamma : {0.0, 0.25}) {
            const Network net = lattice_net(2, 2, box, gamma, seed);
            const std::vector<int> d_edges = edges_within(net, center, s);
            const std::vector<int> h_edges =
                annulus_edges(net, center, s, 2 * s, /*drop_inner_ring=*/true);
            const Network contours = annulus_views(net, center, s, 2 * s).around;
            const ResdifReport rep =
                resdif_gap(net, left_right(net), d_edges, h_edges, contours);
            CHECK_FALSE(rep.disconnected);
            CHECK(rep.lhs <= rep.rhs + 1e-8);
            CHECK(rep.lhs >= -1e-10);  // removing edges cannot lower R
            CHECK(rep.r_without_d >= rep.r_base * (1.0 - 1e-9));
        }
    }
}
