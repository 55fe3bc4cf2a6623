// test_network.cpp — lattice network construction, duality, annuli, and the
// edge-list persistence format.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <vector>

#include "doctest.h"
#include "gffnet/errors.hpp"
#include "gffnet/field.hpp"
#include "gffnet/network.hpp"
#include "gffnet/resistance.hpp"

using namespace gffnet;

namespace {

FieldSample sample_on(int n, int zeta, Rect box, std::uint64_t seed) {
    GridSpec g;
    g.n = n;
    g.zeta = zeta;
    g.box = box;
    return sample_field(g, KernelSpec{0, n}, seed);
}

Network lattice_net(int n, int zeta, Rect box, double gamma, std::uint64_t seed) {
    return build_network(sample_on(n, zeta, box, seed), gamma, box);
}

}  // namespace

TEST_CASE("B(1,1) at the coarsest scale has 25 vertices and 40 edges") {
    const Network net = lattice_net(1, 1, Rect::centered(1.0, 1.0), 0.0, 1);
    CHECK(net.vertex_count() == 25);
    CHECK(net.edge_count() == 40);
    REQUIRE(net.lattice.valid);
    CHECK(net.lattice.nx == 5);
    CHECK(net.lattice.ny == 5);
    CHECK(net.lattice.spacing == doctest::Approx(0.5).epsilon(1e-15));
    for (const NetEdge& e : net.edges) {
        CHECK(e.log_r == 0.0);  // gamma = 0: unit resistances exactly
        CHECK(e.resistance() == 1.0);
    }
}

TEST_CASE("gamma = 0 crossing resistance is W/(H+1) exactly") {
    const double s = std::ldexp(1.0, -2) / 2;  // n = 2, zeta = 2
    auto crossing = [&](int w, int h) {
        const Rect box{0.0, 0.0, w * s, h * s};
        const Network net = lattice_net(2, 2, box, 0.0, 3);
        return effective_resistance(net, left_right(net));
    };
    CHECK(crossing(3, 2) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(crossing(1, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(crossing(4, 1) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(crossing(2, 3) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(crossing(5, 4) == doctest::Approx(1.0).epsilon(1e-12));  // self-dual
}

TEST_CASE("terminal helpers pick the full boundary columns/rows") {
    const double s = std::ldexp(1.0, -2) / 2;
    const Network net = lattice_net(2, 2, Rect{0.0, 0.0, 3 * s, 2 * s}, 0.2, 9);
    const Terminals lr = left_right(net);
    const Terminals ud = up_down(net);
    CHECK(lr.a.size() == 3);  // H+1 rows
    CHECK(lr.z.size() == 3);
    CHECK(ud.a.size() == 4);  // W+1 columns
    CHECK(ud.z.size() == 4);
    for (int v : lr.a) CHECK(net.coords[static_cast<std::size_t>(v)].x == 0.0);
    for (int v : lr.z) {
        CHECK(net.coords[static_cast<std::size_t>(v)].x ==
              doctest::Approx(3 * s).epsilon(1e-15));
    }
    CHECK_NOTHROW(lr.validate(net));
    CHECK_NOTHROW(ud.validate(net));
}

TEST_CASE("dual network has one vertex per face plus two supernodes") {
    const double s = std::ldexp(1.0, -2) / 2;
    const Network net = lattice_net(2, 2, Rect{0.0, 0.0, 3 * s, 2 * s}, 0.2, 11);
    const Network dual = dual_network(net);
    CHECK(dual.vertex_count() == 3 * 2 + 2);
    // every primal edge crosses one dual edge, except vertical edges interior
    // to the left/right terminal columns (H per side)
    CHECK(dual.edge_count() == net.edge_count() - 2 * 2);
    CHECK(dual.supernodes.size() == 2);
    // dual resistances are the reciprocals of the primal ones, edge for edge
    std::multiset<double> primal, dual_r;
    for (const NetEdge& e : net.edges) {
        const Vec2 pu = net.coords[static_cast<std::size_t>(e.u)];
        const Vec2 pv = net.coords[static_cast<std::size_t>(e.v)];
        const bool vertical = pu.x == pv.x;
        const bool terminal_column =
            vertical && (pu.x == 0.0 || pu.x == doctest::Approx(3 * s));
        if (!terminal_column) primal.insert(e.log_r);
    }
    for (const NetEdge& e : dual.edges) dual_r.insert(-e.log_r);
    CHECK(primal == dual_r);
}

TEST_CASE("crossing duality: R_LR(G) * R_UD(dual) = 1") {
    const double s = std::ldexp(1.0, -3) / 2;
    for (std::uint64_t seed : {21ull, 22ull, 23ull}) {
        const Network net =
            lattice_net(3, 2, Rect{0.0, 0.0, 5 * s, 4 * s}, 0.2, seed);
        const double r_lr = effective_resistance(net, left_right(net));
        const Network dual = dual_network(net);
        const double r_dual =
            effective_resistance(dual, supernode_terminals(dual));
        CHECK(std::abs(r_lr * r_dual - 1.0) <= 1e-8);
    }
}

TEST_CASE("edge resistances come from the field at distinct midpoints") {
    const double s = std::ldexp(1.0, -3) / 2;
    const Rect box{0.0, 0.0, 4 * s, 3 * s};
    const FieldSample sample = sample_on(3, 2, box, 31);
    const double gamma = 0.25;
    const Network net = build_network(sample, gamma, box);
    CHECK(net.edge_count() == 4 * 4 + 3 * 5);  // W(H+1) + H(W+1)
    std::set<std::pair<long long, long long>> midpoints;
    for (const NetEdge& e : net.edges) {
        const Vec2 mu = net.coords[static_cast<std::size_t>(e.u)];
        const Vec2 mv = net.coords[static_cast<std::size_t>(e.v)];
        const Vec2 mid{(mu.x + mv.x) / 2, (mu.y + mv.y) / 2};
        CHECK(mid.x == doctest::Approx(e.midpoint.x).epsilon(1e-15));
        CHECK(mid.y == doctest::Approx(e.midpoint.y).epsilon(1e-15));
        CHECK(e.log_r ==
              doctest::Approx(gamma * sample.value_at(mid)).epsilon(1e-14));
        const double h = sample.spacing();
        midpoints.emplace(std::llround(mid.x / h), std::llround(mid.y / h));
    }
    CHECK(midpoints.size() == static_cast<std::size_t>(net.edge_count()));
}

TEST_CASE("coarser meshes share one realization") {
    const double side = 0.25;
    const Rect box{0.0, 0.0, side, side};
    const FieldSample sample = sample_on(2, 6, box, 41);
    const Network fine = build_network(sample, 0.3, box);       // zeta = 6
    const Network mid = build_network(sample, 0.3, box, 3);     // divides 6
    const Network coarse = build_network(sample, 0.3, box, 2);  // divides 6
    CHECK(fine.vertex_count() > mid.vertex_count());
    CHECK(mid.vertex_count() > coarse.vertex_count());
    for (const Network* net : {&mid, &coarse}) {
        for (const NetEdge& e : net->edges) {
            CHECK(e.log_r ==
                  doctest::Approx(0.3 * sample.value_at(e.midpoint)).epsilon(1e-14));
        }
    }
    CHECK_THROWS_AS(build_network(sample, 0.3, box, 4), const ConfigError&);
    CHECK_THROWS_AS(build_network(sample, 0.3, box, 12), const ConfigError&);
}

TEST_CASE("resistances above the log guard are rejected") {
    const Rect box{0.0, 0.0, 0.25, 0.25};
    const FieldSample sample = sample_on(2, 2, box, 51);
    CHECK_THROWS_AS(build_network(sample, 4000.0, box), const Error&);
}

TEST_CASE("annulus views: slit gauge invariance and duality") {
    const double s = std::ldexp(1.0, -2) / 2;  // 1/8
    const Rect box = Rect::centered(3 * s, 3 * s);
    const Vec2 center{0.0, 0.0};
    const double r_in = s, r_out = 2 * s;

    // Uniform resistances: the ring is mirror-symmetric, so the two slit
    // positions must give the same around resistance.
    const Network flat = lattice_net(2, 2, box, 0.0, 61);
    const AnnulusView flat_pos =
        annulus_views(flat, center, r_in, r_out, SlitSide::PositiveX);
    const AnnulusView flat_neg =
        annulus_views(flat, center, r_in, r_out, SlitSide::NegativeX);
    const double flat_around_pos =
        effective_resistance(flat_pos.around, supernode_terminals(flat_pos.around));
    const double flat_around_neg =
        effective_resistance(flat_neg.around, supernode_terminals(flat_neg.around));
    CHECK(flat_around_pos == doctest::Approx(flat_around_neg).epsilon(1e-8));

    // Random resistances: each slit has its own cut-open strip, and the face
    // dual of that strip must reproduce its resistance exactly.
    const Network net = lattice_net(2, 2, box, 0.2, 61);
    for (const SlitSide side : {SlitSide::PositiveX, SlitSide::NegativeX}) {
        const AnnulusView view = annulus_views(net, center, r_in, r_out, side);
        const double around =
            effective_resistance(view.around, supernode_terminals(view.around));
        const Network dual = annulus_dual(net, center, r_in, r_out, side);
        const double r_dual =
            effective_resistance(dual, supernode_terminals(dual));
        CHECK(std::abs(around * r_dual - 1.0) <= 1e-8);
    }

    const AnnulusView pos = annulus_views(net, center, r_in, r_out);
    const double across =
        effective_resistance(pos.across, supernode_terminals(pos.across));
    CHECK(across > 0.0);
    CHECK(std::isfinite(across));
}

TEST_CASE("annulus around view: single-cycle ring is a series circuit") {
    const double s = std::ldexp(1.0, -2) / 2;
    const Rect box = Rect::centered(2 * s, 2 * s);
    const Network net = lattice_net(2, 2, box, 0.0, 63);
    // Radius-one ring: the eight unit resistors around the center in series.
    const AnnulusView view = annulus_views(net, Vec2{0.0, 0.0}, s, s);
    const double around =
        effective_resistance(view.around, supernode_terminals(view.around));
    CHECK(around == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("annulus edge sets are disjoint from the hole") {
    const double s = std::ldexp(1.0, -2) / 2;
    const Rect box = Rect::centered(3 * s, 3 * s);
    const Network net = lattice_net(2, 2, box, 0.0, 71);
    const Vec2 center{0.0, 0.0};
    const std::vector<int> hole = edges_within(net, center, s);
    const std::vector<int> ring =
        annulus_edges(net, center, s, 2 * s, /*drop_inner_ring=*/true);
    CHECK(!hole.empty());
    CHECK(!ring.empty());
    std::set<int> hole_set(hole.begin(), hole.end());
    for (int e : ring) CHECK(hole_set.count(e) == 0);
    // with the inner ring kept, the two sets overlap on the ring edges
    const std::vector<int> ring_all =
        annulus_edges(net, center, s, 2 * s, /*drop_inner_ring=*/false);
    CHECK(ring_all.size() > ring.size());
}

TEST_CASE("network save/load round-trips solves") {
    const double s = std::ldexp(1.0, -2) / 2;
    const Network net = lattice_net(2, 2, Rect{0.0, 0.0, 3 * s, 3 * s}, 0.2, 81);
    const auto dir = std::filesystem::temp_directory_path() / "gffnet_net_rt";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "net.edges").string();
    save_network(net, path);
    const Network loaded = load_network(path);

    CHECK(loaded.vertex_count() == net.vertex_count());
    CHECK(loaded.edge_count() == net.edge_count());
    CHECK(loaded.provenance == "edge-list " + path);
    CHECK_FALSE(loaded.lattice.valid);  // geometry is not part of the format
    for (int e = 0; e < net.edge_count(); ++e) {
        CHECK(loaded.edges[static_cast<std::size_t>(e)].log_r ==
              net.edges[static_cast<std::size_t>(e)].log_r);
    }
    const Terminals t{{0}, {net.vertex_count() - 1}};
    CHECK(effective_resistance(loaded, t) ==
          doctest::Approx(effective_resistance(net, t)).epsilon(1e-12));
    std::filesystem::remove_all(dir);
}

TEST_CASE("malformed edge lists are rejected") {
    const auto dir = std::filesystem::temp_directory_path() / "gffnet_net_bad";
    std::filesystem::create_directories(dir);
    auto write = [&](const char* name, const char* body) {
        const std::string path = (dir / name).string();
        std::ofstream out(path);
        out << body;
        return path;
    };
    CHECK_THROWS_AS(load_network(write("h", "wrong-tag 1 4\n0 1 0 0 0.5\n")),
                    const IoError&);
    CHECK_THROWS_AS(
        load_network(write("v", "gffnet-network 9 4\n0 1 0 0 0.5\n")),
        const IoError&);
    CHECK_THROWS_AS(load_network(write("t", "gffnet-network 1 4\n0 1 0 0\n")),
                    const IoError&);
    CHECK_THROWS_AS(
        load_network(write("r", "gffnet-network 1 4\n0 9 0 0 0.5\n")),
        const IoError&);
    CHECK_THROWS_AS(
        load_network(write("s", "gffnet-network 1 4\n2 2 0 0 0.5\n")),
        const IoError&);
    CHECK_THROWS_AS(
        load_network(write("g", "gffnet-network 1 4\n0 1 0 0 800\n")),
        const IoError&);
    CHECK_THROWS_AS(
        load_network(write("x", "gffnet-network 1 4\n0 1 0 0 0.5 junk\n")),
        const IoError&);
    std::filesystem::remove_all(dir);
}
