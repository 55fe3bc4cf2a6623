// test_walk.cpp — walk simulation against exact solver quantities, start
// specifications, rescaled paths and the parameterization-free curve distance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <tuple>
#include <vector>

#include "doctest.h"
#include "gffnet/errors.hpp"
#include "gffnet/field.hpp"
#include "gffnet/network.hpp"
#include "gffnet/resistance.hpp"
#include "gffnet/rng.hpp"
#include "gffnet/walk.hpp"

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
    Network net = make_net(n_edges + 1, edges);
    for (int v = 0; v <= n_edges; ++v) {
        net.coords[static_cast<std::size_t>(v)] = Vec2{static_cast<double>(v), 0.0};
    }
    return net;
}

}  // namespace

TEST_CASE("step distribution is the conductance share") {
    // star with conductances 1,2,3,4 at the hub
    const Network net = make_net(
        5, {{0, 1, 1.0}, {0, 2, 0.5}, {0, 3, 1.0 / 3.0}, {0, 4, 0.25}});
    std::vector<double> p = step_distribution(net, 0);
    REQUIRE(p.size() == 4);
    std::sort(p.begin(), p.end());
    CHECK(p[0] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(p[2] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(p[3] == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("monte carlo exit statistics match the exact solve on a path") {
    const Network net = unit_path(4);
    const std::vector<int> domain{1, 2, 3};
    const WalkContext ctx(net, domain);

    const long long samples = 20000;
    const ExitMeasure m = exit_measure(ctx, StartSpec::vertex(2), samples, 91);
    CHECK(m.samples == samples);
    CHECK(m.mean_steps_se == doctest::Approx(m.sd_steps / std::sqrt(
                                 static_cast<double>(samples))).epsilon(1e-12));

    // E[tau] = 4 from the exact solve; the MC mean must sit within 4 SE.
    const double exact = exact_exit_expectation(net, domain, 2);
    CHECK(exact == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(std::abs(m.mean_steps - exact) <= 4.0 * m.mean_steps_se);

    // exits split evenly between the two endpoints
    REQUIRE(m.exit_vertices.size() == 2);
    CHECK(m.exit_vertices[0] == 0);
    CHECK(m.exit_vertices[1] == 4);
    const double se_half = std::sqrt(0.25 / static_cast<double>(samples));
    CHECK(std::abs(m.frequency[0] - 0.5) <= 4.0 * se_half);
    CHECK(m.counts[0] + m.counts[1] == samples);

    // second moment: E[tau^2] = 2 sum_y G(x,y) E^y[tau] - E[tau] = 24 here
    const std::vector<double> row = green_row(net, domain, 2);
    const std::vector<double> h = exit_expectation_all(net, domain);
    double weighted = 0.0;
    for (std::size_t i = 0; i < domain.size(); ++i) {
        weighted += row[static_cast<std::size_t>(domain[i])] * h[i];
    }
    const double exact_sq = 2.0 * weighted - exact;
    CHECK(exact_sq == doctest::Approx(24.0).epsilon(1e-12));

    // manual replica loop for the tau^2 standard error
    double sum2 = 0.0, sum4 = 0.0;
    const long long reps = 20000;
    for (long long r = 0; r < reps; ++r) {
        Rng rng(mix_seed(77, static_cast<std::uint64_t>(r)));
        const ExitRecord rec = simulate_until_exit(ctx, 2, rng);
        const double sq = static_cast<double>(rec.steps) * static_cast<double>(rec.steps);
        sum2 += sq;
        sum4 += sq * sq;
    }
    const double mean_sq = sum2 / static_cast<double>(reps);
    const double var_sq =
        (sum4 / static_cast<double>(reps) - mean_sq * mean_sq) *
        static_cast<double>(reps) / static_cast<double>(reps - 1);
    const double se_sq = std::sqrt(var_sq / static_cast<double>(reps));
    CHECK(std::abs(mean_sq - exact_sq) <= 4.0 * se_sq);
}

TEST_CASE("starting outside the domain exits immediately") {
    const Network net = unit_path(4);
    const WalkContext ctx(net, {1, 2, 3});
    Rng rng(5);
    const ExitRecord rec = simulate_until_exit(ctx, 0, rng);
    CHECK(rec.steps == 0);
    CHECK(rec.exit_vertex == 0);
}

TEST_CASE("green row sums to the exit expectation on a random lattice") {
    const double s = std::ldexp(1.0, -2) / 2;
    GridSpec g;
    g.n = 2;
    g.zeta = 2;
    g.box = Rect{0.0, 0.0, 6 * s, 6 * s};
    const Network net =
        build_network(sample_field(g, KernelSpec{0, 2}, 321), 0.2, g.box);
    std::vector<int> domain;
    for (int v = 0; v < net.vertex_count(); ++v) {
        const Vec2 p = net.coords[static_cast<std::size_t>(v)];
        const bool boundary = p.x < 1e-12 || p.y < 1e-12 ||
                              p.x > 6 * s - 1e-12 || p.y > 6 * s - 1e-12;
        if (!boundary) domain.push_back(v);
    }
    const int start = domain[domain.size() / 2];
    const std::vector<double> row = green_row(net, domain, start);
    double visit_sum = 0.0;
    for (int y : domain) visit_sum += row[static_cast<std::size_t>(y)];
    CHECK(std::abs(visit_sum - exact_exit_expectation(net, domain, start)) <= 1e-7);
}

TEST_CASE("barycentric starts sample the stated weights") {
    const Network net = unit_path(4);
    const WalkContext ctx(net, {1, 2, 3});
    const StartSpec spec = StartSpec::barycentric(1, 2, 3, 0.2, 0.3, 0.5);
    spec.validate(net);
    Rng rng(2026);
    const int draws = 40000;
    int c1 = 0, c2 = 0, c3 = 0;
    for (int i = 0; i < draws; ++i) {
        const int v = spec.sample(rng);
        if (v == 1) ++c1;
        if (v == 2) ++c2;
        if (v == 3) ++c3;
    }
    CHECK(c1 + c2 + c3 == draws);
    const auto within = [&](int count, double p) {
        const double se = std::sqrt(p * (1 - p) / draws);
        return std::abs(static_cast<double>(count) / draws - p) <= 4.0 * se;
    };
    CHECK(within(c1, 0.2));
    CHECK(within(c2, 0.3));
    CHECK(within(c3, 0.5));

    StartSpec bad;
    bad.atoms = {{-1, 1.0}};
    CHECK_THROWS_AS(bad.validate(net), const ConfigError&);
    StartSpec unnormalized;
    unnormalized.atoms = {{1, 0.4}, {2, 0.4}};
    CHECK_THROWS_AS(unnormalized.validate(net), const ConfigError&);
}

TEST_CASE("chi factor and rescaled duration") {
    CHECK(chi_factor(4, 2, 0.0) == doctest::Approx(1024.0).epsilon(1e-12));
    CHECK(chi_factor(3, 2, 0.2) ==
          doctest::Approx(std::exp2((2.0 + 0.5 * 0.04) * 3.0) * 4.0).epsilon(1e-12));

    const Network net = unit_path(4);
    const WalkContext ctx(net, {1, 2, 3});
    Rng rng(8);
    const ExitRecord rec = simulate_until_exit(ctx, 2, rng, /*keep_trace=*/true);
    REQUIRE(static_cast<long long>(rec.trace.size()) == rec.steps + 1);
    const RescaledPath path = rescaled_path(rec, net, 3, 2, 0.2);
    CHECK(path.chi == doctest::Approx(chi_factor(3, 2, 0.2)).epsilon(1e-12));
    CHECK(path.duration ==
          doctest::Approx(static_cast<double>(rec.steps) / path.chi).epsilon(1e-12));
    CHECK(path.points.size() == rec.trace.size());
    // endpoints evaluate exactly; beyond the duration the path is constant
    CHECK(path.at(0.0).x == path.points.front().x);
    CHECK(path.at(10.0 * path.duration).x == path.points.back().x);
}

TEST_CASE("cmp distance: identity, translation, reparameterization") {
    RescaledPath a;
    a.chi = 1.0;
    for (int i = 0; i <= 10; ++i) {
        a.points.push_back(Vec2{static_cast<double>(i) / 10.0, 0.0});
    }
    a.duration = static_cast<double>(a.points.size() - 1) / a.chi;

    CHECK(cmp_distance(a, a) == doctest::Approx(0.0).epsilon(1e-12));

    RescaledPath b = a;
    for (auto& p : b.points) p.y += 0.1;
    CHECK(cmp_distance(a, b) == doctest::Approx(0.1).epsilon(1e-9));

    // same segment traversed at a quadratic speed profile with more samples:
    // distance modulo parameterization stays near zero
    RescaledPath c;
    c.chi = 1.0;
    for (int i = 0; i <= 20; ++i) {
        const double t = static_cast<double>(i) / 20.0;
        c.points.push_back(Vec2{t * t, 0.0});
    }
    c.duration = static_cast<double>(c.points.size() - 1) / c.chi;
    CHECK(cmp_distance(a, c) <= 0.02);
    CHECK(cmp_distance(a, c) == doctest::Approx(cmp_distance(c, a)).epsilon(1e-12));
}

TEST_CASE("exit measures are deterministic in the master seed") {
    const Network net = unit_path(6);
    const WalkContext ctx(net, {1, 2, 3, 4, 5});
    const ExitMeasure m1 = exit_measure(ctx, StartSpec::vertex(3), 500, 1234);
    const ExitMeasure m2 = exit_measure(ctx, StartSpec::vertex(3), 500, 1234);
    CHECK(m1.counts == m2.counts);
    CHECK(m1.mean_steps == m2.mean_steps);
    const ExitMeasure m3 = exit_measure(ctx, StartSpec::vertex(3), 500, 1235);
    CHECK(m1.counts != m3.counts);
}

TEST_CASE("step budget violations raise BudgetError") {
    const Network net = unit_path(20);
    const WalkContext ctx(net, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10,
                                11, 12, 13, 14, 15, 16, 17, 18, 19});
    Rng rng(99);
    CHECK_THROWS_AS(simulate_until_exit(ctx, 10, rng, false, 2),
                    const BudgetError&);
}
