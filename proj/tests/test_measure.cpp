// test_measure.cpp — vertex measures: closed-form normalization at gamma = 0,
// corner sums, the pi consistency pair, additivity, and compensated summation.

#include <cmath>
#include <vector>

#include "doctest.h"
#include "gffnet/field.hpp"
#include "gffnet/measure.hpp"
#include "gffnet/network.hpp"

using namespace gffnet;

namespace {

FieldSample sample_grid(int n, int zeta, Rect box, std::uint64_t seed) {
    GridSpec g;
    g.n = n;
    g.zeta = zeta;
    g.box = box;
    return sample_field(g, KernelSpec{0, n}, seed);
}

}  // namespace

TEST_CASE("gamma = 0 measure is the vertex count, normalized to one") {
    const Rect box{0.0, 0.0, 0.5, 0.5};
    const FieldSample f = sample_grid(2, 2, box, 11);
    const MeasureReport rep = eta_measure(f, 0.0, box, 2);
    CHECK(rep.raw == 25.0);
    CHECK(rep.box_size == 25);
    CHECK(rep.expectation == 25.0);
    CHECK(rep.normalized == 1.0);
    CHECK_FALSE(rep.empirical_normalization);
}

TEST_CASE("one-cell box sums the corner exponentials") {
    const double s = std::ldexp(1.0, -2) / 2;
    const Rect box{0.0, 0.0, 4 * s, 4 * s};
    const FieldSample f = sample_grid(2, 2, box, 12);
    const double gamma = 0.3;
    const Rect cell{0.0, 0.0, s, s};
    const MeasureReport rep = eta_measure(f, gamma, cell, 2);
    CHECK(rep.box_size == 4);
    const double expect = std::exp(gamma * f.value_at(Vec2{0.0, 0.0})) +
                          std::exp(gamma * f.value_at(Vec2{s, 0.0})) +
                          std::exp(gamma * f.value_at(Vec2{0.0, s})) +
                          std::exp(gamma * f.value_at(Vec2{s, s}));
    CHECK(rep.raw == doctest::Approx(expect).epsilon(1e-13));
    CHECK(rep.expectation ==
          doctest::Approx(4.0 * std::exp2(gamma * gamma * 2 / 2.0)).epsilon(1e-13));
    CHECK(rep.normalized == doctest::Approx(rep.raw / rep.expectation).epsilon(1e-14));
}

TEST_CASE("eta is additive over vertex-disjoint boxes") {
    const double s = std::ldexp(1.0, -3) / 2;
    const Rect box{0.0, 0.0, 8 * s, 4 * s};
    const FieldSample f = sample_grid(3, 2, box, 13);
    const double gamma = 0.4;
    const Rect whole{0.0, 0.0, 4 * s, 4 * s};
    const Rect left{0.0, 0.0, s, 4 * s};           // vertices x in {0, s}
    const Rect right{2 * s, 0.0, 4 * s, 4 * s};    // vertices x in {2s,3s,4s}
    const double a = eta_measure(f, gamma, left, 2).raw;
    const double b = eta_measure(f, gamma, right, 2).raw;
    const double whole_raw = eta_measure(f, gamma, whole, 2).raw;
    CHECK(a + b == doctest::Approx(whole_raw).epsilon(1e-12));
}

TEST_CASE("pi measure agrees between the vertex and edge accumulation routes") {
    const double s = std::ldexp(1.0, -2) / 2;
    const Rect box{0.0, 0.0, 5 * s, 3 * s};
    const Network net = build_network(sample_grid(2, 2, box, 14), 0.25, box);

    std::vector<int> all;
    for (int v = 0; v < net.vertex_count(); ++v) all.push_back(v);
    const MeasureReport rep = pi_measure(net, all);
    CHECK(rep.raw == doctest::Approx(pi_measure_by_edges(net, all)).epsilon(1e-12));
    CHECK(rep.empirical_normalization);
    CHECK(rep.normalized == rep.raw);  // no divisor provided

    const std::vector<int> subset{0, 3, 7, 11};
    CHECK(pi_measure(net, subset).raw ==
          doctest::Approx(pi_measure_by_edges(net, subset)).epsilon(1e-12));

    const MeasureReport scaled = pi_measure(net, all, rep.raw / all.size());
    CHECK(scaled.normalized ==
          doctest::Approx(static_cast<double>(all.size())).epsilon(1e-12));
}

TEST_CASE("neumaier summation survives catastrophic cancellation") {
    NeumaierSum big;
    big.add(1e100);
    big.add(1.0);
    big.add(-1e100);
    CHECK(big.value() == 1.0);

    NeumaierSum tenths;
    for (int i = 0; i < 16; ++i) tenths.add(0.1);
    CHECK(tenths.value() == doctest::Approx(1.6).epsilon(1e-15));
}
