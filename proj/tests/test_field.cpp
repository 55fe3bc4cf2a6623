// test_field.cpp — band-field sampling: covariance oracles, layer structure,
// synthesis routes, persistence, and resource guards.

#include <cstdlib>
#include <filesystem>
#include <vector>

#include "doctest.h"
#include "gffnet/errors.hpp"
#include "gffnet/field.hpp"
#include "gffnet/rng.hpp"

using namespace gffnet;

namespace {

GridSpec grid(int n, int zeta, Rect box) {
    GridSpec g;
    g.n = n;
    g.zeta = zeta;
    g.box = box;
    return g;
}

}  // namespace

// Oracle values computed independently by 40-digit quadrature of
//   C_{m,n}(r) = sum_{k=m+1}^{n} (1/2) int_{4^{k-1}}^{4^k} exp(-r^2 s/2)/s ds,
// cross-checked against the E1 form of the same integral.
TEST_CASE("band covariance matches the quadrature oracle") {
    const Vec2 o{0.0, 0.0};
    // r = |(0.125, 0.25)|, band 0..3
    CHECK(analytic_covariance(o, Vec2{0.125, 0.25}, 0, 3) ==
          doctest::Approx(1.339573043126938908).epsilon(1e-12));
    // r = 0.125, band 0..3
    CHECK(analytic_covariance(o, Vec2{0.125, 0.0}, 0, 3) ==
          doctest::Approx(1.8614191359525287868).epsilon(1e-12));
    // r = 0.0625, band 1..4: equals the previous value by exact scaling
    CHECK(analytic_covariance(o, Vec2{0.0625, 0.0}, 1, 4) ==
          doctest::Approx(1.8614191359525287868).epsilon(1e-12));
    // r = sqrt(2) * 0.03125, band 0..5
    CHECK(analytic_covariance(o, Vec2{0.03125, 0.03125}, 0, 5) ==
          doctest::Approx(3.0679242652177757645).epsilon(1e-12));
    // single layers
    CHECK(layer_covariance(0.5, 1) ==
          doctest::Approx(0.53182602290400398985).epsilon(1e-12));
    CHECK(layer_covariance(0.25, 2) ==
          doctest::Approx(0.53182602290400398985).epsilon(1e-12));
}

TEST_CASE("variance is (n - m) log 2 and layers scale exactly") {
    const Vec2 p{0.25, 0.125};
    for (int m = 0; m < 3; ++m) {
        for (int n = m + 1; n <= 5; ++n) {
            CHECK(analytic_covariance(p, p, m, n) ==
                  doctest::Approx((n - m) * std::log(2.0)).epsilon(1e-13));
        }
    }
    for (int k = 1; k <= 6; ++k) {
        for (double r : {0.7, 0.31, 0.05}) {
            CHECK(layer_covariance(r, k) ==
                  doctest::Approx(layer_covariance(r / 2.0, k + 1)).epsilon(1e-12));
        }
    }
}

TEST_CASE("sampled moments match the analytic band covariance") {
    const GridSpec g = grid(3, 2, Rect::centered(0.0625, 0.0625));
    const KernelSpec kernel{0, 3};
    const int samples = 4000;

    const Vec2 a{0.0, 0.0};
    const Vec2 b{0.03125, 0.0};
    const Vec2 c{0.0625, 0.03125};
    std::vector<double> va(samples), vb(samples), vc(samples);
    for (int i = 0; i < samples; ++i) {
        const FieldSample s = sample_field(g, kernel, mix_seed(123, i));
        va[static_cast<std::size_t>(i)] = s.value_at(a);
        vb[static_cast<std::size_t>(i)] = s.value_at(b);
        vc[static_cast<std::size_t>(i)] = s.value_at(c);
    }

    auto check_cov = [&](const std::vector<double>& x, const std::vector<double>& y,
                         Vec2 px, Vec2 py) {
        double mx = 0, my = 0;
        for (int i = 0; i < samples; ++i) {
            mx += x[static_cast<std::size_t>(i)];
            my += y[static_cast<std::size_t>(i)];
        }
        mx /= samples;
        my /= samples;
        double c1 = 0, c2 = 0;
        for (int i = 0; i < samples; ++i) {
            const double prod = (x[static_cast<std::size_t>(i)] - mx) *
                                (y[static_cast<std::size_t>(i)] - my);
            c1 += prod;
            c2 += prod * prod;
        }
        const double cov = c1 / samples;
        const double se = std::sqrt((c2 / samples - cov * cov) / samples);
        const double expected = analytic_covariance(px, py, kernel.m, kernel.n);
        CHECK(std::abs(cov - expected) <= 4.0 * se);
    };
    check_cov(va, va, a, a);
    check_cov(vb, vb, b, b);
    check_cov(va, vb, a, b);
    check_cov(va, vc, a, c);
    check_cov(vb, vc, b, c);
}

TEST_CASE("layer streams make ranges additive") {
    const GridSpec g = grid(4, 2, Rect{0.0, 0.0, 0.125, 0.09375});
    const std::uint64_t seed = 2024;
    const FieldSample whole = sample_field(g, KernelSpec{0, 4}, seed);
    const FieldSample low = sample_field(g, KernelSpec{0, 2}, seed);
    const FieldSample high = sample_field(g, KernelSpec{2, 4}, seed);
    REQUIRE(whole.values.size() == low.values.size());
    for (std::size_t i = 0; i < whole.values.size(); ++i) {
        CHECK(whole.values[i] ==
              doctest::Approx(low.values[i] + high.values[i]).epsilon(1e-12));
    }
}

TEST_CASE("sampling is deterministic and negation flips the sign") {
    const GridSpec g = grid(3, 2, Rect{0.0, 0.0, 0.125, 0.125});
    const FieldSample s1 = sample_field(g, KernelSpec{0, 3}, 77);
    const FieldSample s2 = sample_field(g, KernelSpec{0, 3}, 77);
    const FieldSample neg = sample_field(g, KernelSpec{0, 3}, 77, true);
    const FieldSample other = sample_field(g, KernelSpec{0, 3}, 78);
    REQUIRE(s1.values.size() == s2.values.size());
    bool bit_equal = true, any_diff = false;
    for (std::size_t i = 0; i < s1.values.size(); ++i) {
        bit_equal = bit_equal && s1.values[i] == s2.values[i];
        CHECK(neg.values[i] == -s1.values[i]);
        any_diff = any_diff || s1.values[i] != other.values[i];
    }
    CHECK(bit_equal);
    CHECK(any_diff);
    CHECK(neg.negated);
}

TEST_CASE("window covers the box on the refined lattice") {
    const GridSpec g = grid(2, 2, Rect{-0.25, 0.0, 0.25, 0.375});
    const FieldSample s = sample_field(g, KernelSpec{0, 2}, 5);
    const double h = s.spacing();
    CHECK(h == doctest::Approx(std::ldexp(1.0, -3) / 2).epsilon(1e-15));
    // corners land exactly on window indices
    CHECK_NOTHROW(s.value_at(Vec2{-0.25, 0.0}));
    CHECK_NOTHROW(s.value_at(Vec2{0.25, 0.375}));
    CHECK_NOTHROW(s.value_at(Vec2{0.0, 0.1875}));
    CHECK_THROWS_AS(s.value_at(Vec2{0.26, 0.0}), const Error&);
    CHECK_THROWS_AS(s.value_at(Vec2{0.2 * h, 0.0}), const OffLatticeError&);
    // snapping tolerates tiny fp noise
    CHECK(s.value_at(Vec2{0.0625 + 1e-12, 0.1875}) ==
          s.value_at(Vec2{0.0625, 0.1875}));
}

TEST_CASE("truncated kernel: compact slices, determinism, additivity") {
    KernelSpec kernel{0, 3};
    kernel.kind = KernelKind::Truncated;
    const GridSpec g = grid(3, 2, Rect{0.0, 0.0, 0.125, 0.125});
    const double h = g.refined_spacing();

    for (int k = 1; k <= kernel.n; ++k) {
        for (int q = 0; q < kernel.time_slices; ++q) {
            const field_detail::SliceKernel slice =
                field_detail::truncated_slice_kernel(k, q, kernel, h);
            CHECK(slice.sigma > 0.0);
            CHECK(slice.support_radius == doctest::Approx(2.0 * slice.sigma));
            CHECK(slice.radius_cells >= 0);
            const int w = 2 * slice.radius_cells + 1;
            REQUIRE(slice.weights.size() ==
                    static_cast<std::size_t>(w) * static_cast<std::size_t>(w));
            // corners of the stencil lie beyond the support radius: exactly zero
            if (slice.radius_cells > 0) {
                const double corner =
                    std::hypot(slice.radius_cells * h, slice.radius_cells * h);
                if (corner > slice.support_radius) {
                    CHECK(slice.weights.front() == 0.0);
                    CHECK(slice.weights.back() == 0.0);
                }
            }
        }
    }

    const FieldSample s1 = sample_field(g, kernel, 99);
    const FieldSample s2 = sample_field(g, kernel, 99);
    for (std::size_t i = 0; i < s1.values.size(); ++i) {
        CHECK(s1.values[i] == s2.values[i]);
    }

    KernelSpec low = kernel, high = kernel;
    low.n = 1;
    high.m = 1;
    const FieldSample sl = sample_field(g, low, 99);
    const FieldSample sh = sample_field(g, high, 99);
    for (std::size_t i = 0; i < s1.values.size(); ++i) {
        CHECK(s1.values[i] ==
              doctest::Approx(sl.values[i] + sh.values[i]).epsilon(1e-12));
    }

    // sigma_t spot value: eps0 sqrt(t) |log t|^{eps0}
    const double t = 0.25;
    CHECK(field_detail::sigma_of_t(t, 0.01) ==
          doctest::Approx(0.01 * 0.5 * std::pow(std::log(4.0), 0.01))
              .epsilon(1e-14));
    CHECK(field_detail::bump(0.5) == 1.0);
    CHECK(field_detail::bump(2.5) == 0.0);
    CHECK(field_detail::bump(1.5) > 0.0);
    CHECK(field_detail::bump(1.5) < 1.0);
}

TEST_CASE("oscillation decreases with finer partitions") {
    const GridSpec g = grid(2, 2, Rect{0.0, 0.0, 0.5, 0.5});
    FieldSample s = sample_field(g, KernelSpec{0, 2}, 31);
    const Rect region{0.0, 0.0, 0.5, 0.5};
    double mn = s.values.front(), mx = s.values.front();
    for (double v : s.values) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    // eps beyond the region diameter (0.5*sqrt(2)): every pair is admissible.
    const double whole = oscillation(s, 0.75, region);
    CHECK(whole == doctest::Approx(mx - mn).epsilon(1e-12));
    const double quarters = oscillation(s, 0.25, region);
    const double eighths = oscillation(s, 0.125, region);
    CHECK(quarters <= whole + 1e-12);
    CHECK(eighths <= quarters + 1e-12);
    CHECK(eighths >= 0.0);
}

TEST_CASE("both synthesis routes reproduce the variance") {
    const GridSpec g = grid(2, 2, Rect::centered(0.25, 0.25));
    const KernelSpec kernel{0, 2};
    const Vec2 probe{0.0, 0.0};
    const double expected = analytic_covariance(probe, probe, 0, 2);
    const int samples = 3000;

    auto mc_var = [&](field_detail::Route route) {
        field_detail::RouteOverride forced(route);
        double sum = 0, sum2 = 0, sum4 = 0;
        for (int i = 0; i < samples; ++i) {
            const double v =
                sample_field(g, kernel, mix_seed(777, i)).value_at(probe);
            sum += v;
            sum2 += v * v;
            sum4 += v * v * v * v;
        }
        const double mean = sum / samples;
        const double var = sum2 / samples - mean * mean;
        const double se =
            std::sqrt((sum4 / samples - (sum2 / samples) * (sum2 / samples)) /
                      samples);
        return std::pair<double, double>(var, se);
    };

    clear_field_caches();
    const auto [vd, sed] = mc_var(field_detail::Route::ForceDense);
    clear_field_caches();
    const auto [vc, sec] = mc_var(field_detail::Route::ForceCirculant);
    clear_field_caches();
    CHECK(std::abs(vd - expected) <= 4.0 * sed);
    CHECK(std::abs(vc - expected) <= 4.0 * sec);
}

TEST_CASE("route predicate and embedding diagnostics") {
    using field_detail::dense_route;
    CHECK(dense_route(100, 10000));
    CHECK_FALSE(dense_route(13000, 13000 * 17));  // too many points
    CHECK_FALSE(dense_route(100, 800));           // torus too close in size

    const GridSpec g = grid(3, 2, Rect{0.0, 0.0, 0.25, 0.25});
    for (int k = 1; k <= 3; ++k) {
        const field_detail::EmbeddingInfo info =
            field_detail::circulant_embedding_info(g, k);
        CHECK(info.lx > 0);
        CHECK(info.ly > 0);
        CHECK(info.lambda_max > 0.0);
        // PSD up to float noise: negatives are bounded by the clip rule and
        // only rounding-level eigenvalues ever get clipped to zero
        CHECK(info.lambda_min >= -1e-8 * info.lambda_max);
        for (long long d : {info.lx, info.ly}) {
            while (d % 2 == 0) d /= 2;
            while (d % 3 == 0) d /= 3;
            while (d % 5 == 0) d /= 5;
            CHECK(d == 1);  // 5-smooth torus dimensions
        }
        CHECK(field_detail::layer_padding(k) ==
              doctest::Approx(8.0 * std::ldexp(1.0, -(k - 1))));
        CHECK(field_detail::dense_layer_rank(g, k) >= 1);
    }
}

TEST_CASE("field save/load round-trips bit-exactly") {
    const auto dir = std::filesystem::temp_directory_path() / "gffnet_field_rt";
    std::filesystem::create_directories(dir);
    const std::string prefix = (dir / "sample").string();

    GridSpec g = grid(3, 2, Rect{-0.0625, 0.0, 0.125, 0.1875});
    KernelSpec kernel{1, 3};
    kernel.kind = KernelKind::Truncated;
    const FieldSample s = sample_field(g, kernel, 0xabcdef1234567890ull, true);
    save_field(s, prefix);
    const FieldSample r = load_field(prefix);

    CHECK(r.grid.n == s.grid.n);
    CHECK(r.grid.zeta == s.grid.zeta);
    CHECK(r.grid.box.x0 == s.grid.box.x0);
    CHECK(r.grid.box.y1 == s.grid.box.y1);
    CHECK(r.kernel.m == s.kernel.m);
    CHECK(r.kernel.n == s.kernel.n);
    CHECK((r.kernel.kind == s.kernel.kind));
    CHECK(r.seed == s.seed);
    CHECK(r.negated == s.negated);
    CHECK(r.i0 == s.i0);
    CHECK(r.j0 == s.j0);
    CHECK(r.nx == s.nx);
    CHECK(r.ny == s.ny);
    REQUIRE(r.values.size() == s.values.size());
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        CHECK(r.values[i] == s.values[i]);
    }

    // trailing garbage in the data file is rejected
    {
        std::FILE* f = std::fopen((prefix + ".f64").c_str(), "ab");
        REQUIRE(f != nullptr);
        const char junk = 0;
        std::fwrite(&junk, 1, 1, f);
        std::fclose(f);
        CHECK_THROWS_AS(load_field(prefix), const IoError&);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("memory budget guard raises ResourceError") {
    clear_field_caches();
    setenv("GFFNET_MEMORY_BUDGET_BYTES", "128", 1);
    const GridSpec g = grid(3, 2, Rect{0.0, 0.0, 0.25, 0.25});
    CHECK_THROWS_AS(sample_field(g, KernelSpec{0, 3}, 1), const ResourceError&);
    unsetenv("GFFNET_MEMORY_BUDGET_BYTES");
    clear_field_caches();
    CHECK_NOTHROW(sample_field(g, KernelSpec{0, 3}, 1));
}

TEST_CASE("kernel and grid specs validate their inputs") {
    const KernelSpec empty_band{2, 2};
    const KernelSpec negative_m{-1, 3};
    CHECK_THROWS_AS(empty_band.validate(), const ConfigError&);
    CHECK_THROWS_AS(negative_m.validate(), const ConfigError&);
    GridSpec g = grid(4, 1, Rect{0.0, 0.0, 0.25, 0.25});
    CHECK_THROWS_AS(g.validate(), const ConfigError&);  // zeta < sqrt(n)
    g.zeta_override = true;
    CHECK_NOTHROW(g.validate());
    GridSpec off = grid(2, 1, Rect{0.0, 0.0, 0.3, 0.25});
    CHECK_THROWS_AS(off.validate(), const ConfigError&);  // corner off-lattice
}
