// field.cpp — layered synthesis of phi_{m,n} / psi_{m,n} on boxes.
//
// Each dyadic layer k = m+1..n is an independent stationary Gaussian field with
// covariance C_k(r) = (E1(r^2 4^{k-1}/2) - E1(r^2 4^k/2))/2, C_k(0) = log 2.
// Two exact synthesis routes are available per layer:
//   * circulant embedding on a padded torus (FFT; the workhorse for large boxes),
//   * pivoted Cholesky of the in-box Gram matrix (small boxes, coarse layers,
//     where the padded torus would dwarf the box; the layer is smooth at box
//     scale so the factor has tiny numerical rank).
// The route is a pure function of geometry, and layer noise streams are keyed by
// (master seed, k), so samples are deterministic and range-additive.
//
// The truncated kernel psi is synthesized per layer from Q log-uniform time
// slices, each an explicit convolution of refined-grid white noise with the
// compactly supported stencil sqrt(pi) * ptilde_{t/2}(d) * h * sqrt(dt).

#include "gffnet/field.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include <Eigen/Dense>
#include <fftw3.h>

#include "gffnet/rng.hpp"

namespace gffnet {

namespace {

constexpr double kLog2 = 0.69314718055994530941723212145818;
constexpr double kSqrtPi = 1.7724538509055160272981674833411;
constexpr double kTwoPi = 6.2831853071795864769252867665590;

// E1(x) = int_x^inf e^{-s}/s ds, x > 0. Underflows to 0 past ~740.
double exp_int_e1(double x) {
    if (x > 740.0) return 0.0;
    return -std::expint(-x);
}

// ---- window / torus geometry ----

struct Window {
    long long i0 = 0, j0 = 0, nx = 0, ny = 0;
    long long count() const { return nx * ny; }
};

Window refined_window(const GridSpec& grid) {
    const double h = grid.refined_spacing();
    Window w;
    w.i0 = snap_index(grid.box.x0, h, "box.x0");
    w.j0 = snap_index(grid.box.y0, h, "box.y0");
    w.nx = snap_index(grid.box.x1, h, "box.x1") - w.i0 + 1;
    w.ny = snap_index(grid.box.y1, h, "box.y1") - w.j0 + 1;
    return w;
}

// Smallest 5-smooth integer >= v (FFT-friendly torus dimensions).
long long next_smooth(long long v) {
    if (v < 4) return 4;
    for (;; ++v) {
        long long x = v;
        for (long long p : {2LL, 3LL, 5LL}) {
            while (x % p == 0) x /= p;
        }
        if (x == 1) return v;
    }
}

struct Torus {
    long long lx = 0, ly = 0;
    long long count() const { return lx * ly; }
};

Torus layer_torus(const Window& w, double h, int k) {
    const long long pad_cells =
        static_cast<long long>(std::ceil(field_detail::layer_padding(k) / h));
    Torus t;
    t.lx = next_smooth(w.nx - 1 + 2 * pad_cells);
    t.ly = next_smooth(w.ny - 1 + 2 * pad_cells);
    return t;
}

// ---- route selection ----

field_detail::Route g_route_override = field_detail::Route::Automatic;

constexpr long long kDenseMaxPoints = 12000;
constexpr long long kDenseTorusRatio = 16;
constexpr long long kDenseRankCap = 3000;
constexpr double kDenseTraceTol = 1e-13;

bool layer_uses_dense(const Window& w, const Torus& t) {
    using field_detail::Route;
    if (g_route_override == Route::ForceDense) return true;
    if (g_route_override == Route::ForceCirculant) return false;
    return field_detail::dense_route(w.count(), t.count());
}

// ---- caches (keyed by integers only; h is a function of n and zeta) ----

struct LayerKey {
    int k = 0, n = 0, zeta = 0;
    long long a = 0, b = 0;  // dense: window dims; circulant: torus dims
    bool operator<(const LayerKey& o) const {
        return std::tie(k, n, zeta, a, b) < std::tie(o.k, o.n, o.zeta, o.a, o.b);
    }
};

struct DenseFactor {
    Eigen::MatrixXd cols;  // N x rank, field = cols * z
};

struct CirculantAmp {
    std::vector<double> amp;  // sqrt(max(lambda,0)/N), torus row-major
    field_detail::EmbeddingInfo info;
};

std::mutex g_cache_mutex;
std::map<LayerKey, std::shared_ptr<const DenseFactor>> g_dense_cache;
std::map<LayerKey, std::shared_ptr<const CirculantAmp>> g_circulant_cache;

// FFTW planner calls are not thread-safe; executions on distinct plans are.
std::mutex g_fftw_mutex;

// ---- dense route: diagonally pivoted Cholesky of the layer Gram matrix ----

std::shared_ptr<const DenseFactor> dense_factor(const LayerKey& key, double h) {
    {
        std::lock_guard<std::mutex> lock(g_cache_mutex);
        auto it = g_dense_cache.find(key);
        if (it != g_dense_cache.end()) return it->second;
    }

    const long long nx = key.a, ny = key.b;
    const long long total = nx * ny;
    const int n_pts = static_cast<int>(total);
    const double c0 = layer_covariance(0.0, key.k);

    // Covariance entry between window points a=(ax,ay), b (stationary, radial).
    auto cov = [&](int pa, int pb) {
        const long long dx = pa % nx - pb % nx;
        const long long dy = pa / nx - pb / nx;
        return layer_covariance(h * std::hypot(static_cast<double>(dx),
                                               static_cast<double>(dy)),
                                key.k);
    };

    std::vector<double> diag(static_cast<std::size_t>(n_pts), c0);
    const double trace0 = c0 * static_cast<double>(n_pts);
    double trace_rem = trace0;
    std::vector<Eigen::VectorXd> cols;
    cols.reserve(256);

    const long long rank_cap = std::min<long long>(n_pts, kDenseRankCap);
    while (trace_rem > kDenseTraceTol * trace0) {
        if (static_cast<long long>(cols.size()) >= rank_cap) {
            throw EmbeddingError(
                "pivoted Cholesky did not reach tolerance within the rank cap; "
                "this layer/box geometry should use the circulant route");
        }
        int pivot = 0;
        for (int i = 1; i < n_pts; ++i) {
            if (diag[i] > diag[pivot]) pivot = i;
        }
        if (diag[pivot] <= 0.0) break;  // remainder at roundoff

        Eigen::VectorXd col(n_pts);
        for (int i = 0; i < n_pts; ++i) col[i] = cov(i, pivot);
        for (const auto& prev : cols) col.noalias() -= prev * prev[pivot];
        col /= std::sqrt(diag[pivot]);

        trace_rem = 0.0;
        for (int i = 0; i < n_pts; ++i) {
            diag[i] = std::max(0.0, diag[i] - col[i] * col[i]);
            trace_rem += diag[i];
        }
        cols.push_back(std::move(col));
    }

    auto factor = std::make_shared<DenseFactor>();
    factor->cols.resize(n_pts, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
        factor->cols.col(static_cast<Eigen::Index>(j)) = cols[j];
    }

    std::lock_guard<std::mutex> lock(g_cache_mutex);
    auto [it, inserted] = g_dense_cache.emplace(key, std::move(factor));
    (void)inserted;  // a concurrent builder may have won; use whichever is stored
    return it->second;
}

void add_dense_layer(const LayerKey& key, double h, Rng& rng,
                     std::vector<double>& values) {
    const auto factor = dense_factor(key, h);
    const Eigen::Index rank = factor->cols.cols();
    Eigen::VectorXd z(rank);
    for (Eigen::Index j = 0; j < rank; ++j) z[j] = rng.normal();
    Eigen::Map<Eigen::VectorXd> out(values.data(),
                                    static_cast<Eigen::Index>(values.size()));
    out.noalias() += factor->cols * z;
}

// ---- circulant route ----

std::shared_ptr<const CirculantAmp> circulant_amp(const LayerKey& key, double h) {
    {
        std::lock_guard<std::mutex> lock(g_cache_mutex);
        auto it = g_circulant_cache.find(key);
        if (it != g_circulant_cache.end()) return it->second;
    }

    const long long lx = key.a, ly = key.b;
    const long long total = lx * ly;

    // First row of the embedding: the exact periodization of C_k over the torus
    // (3x3 images; farther images are below 1e-100). A periodized positive
    // definite function is positive semi-definite, so negative eigenvalues can
    // only come from roundoff and the clip rule below is safe.
    std::vector<double> first_row(static_cast<std::size_t>(total));
    const double lxh = static_cast<double>(lx) * h;
    const double lyh = static_cast<double>(ly) * h;
    for (long long iy = 0; iy <= ly / 2; ++iy) {
        for (long long ix = 0; ix <= lx / 2; ++ix) {
            double c = 0.0;
            for (int my = -1; my <= 1; ++my) {
                const double dy = static_cast<double>(iy) * h + my * lyh;
                for (int mx = -1; mx <= 1; ++mx) {
                    const double dx = static_cast<double>(ix) * h + mx * lxh;
                    c += layer_covariance(std::hypot(dx, dy), key.k);
                }
            }
            for (long long sy : {iy, (ly - iy) % ly}) {
                for (long long sx : {ix, (lx - ix) % lx}) {
                    first_row[static_cast<std::size_t>(sy * lx + sx)] = c;
                }
            }
        }
    }

    // Eigenvalues of the circulant = unnormalized forward DFT of the first row.
    fftw_complex* buf = fftw_alloc_complex(static_cast<std::size_t>(total));
    if (buf == nullptr) {
        throw ResourceError("circulant embedding buffer allocation failed",
                            16 * total);
    }
    for (long long i = 0; i < total; ++i) {
        buf[i][0] = first_row[static_cast<std::size_t>(i)];
        buf[i][1] = 0.0;
    }
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(g_fftw_mutex);
        plan = fftw_plan_dft_2d(static_cast<int>(ly), static_cast<int>(lx), buf,
                                buf, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(g_fftw_mutex);
        fftw_destroy_plan(plan);
    }

    auto result = std::make_shared<CirculantAmp>();
    result->info.lx = lx;
    result->info.ly = ly;
    double lambda_min = buf[0][0], lambda_max = buf[0][0];
    for (long long i = 0; i < total; ++i) {
        lambda_min = std::min(lambda_min, buf[i][0]);
        lambda_max = std::max(lambda_max, buf[i][0]);
    }
    result->info.lambda_min = lambda_min;
    result->info.lambda_max = lambda_max;
    if (lambda_min < -1e-8 * lambda_max) {
        fftw_free(buf);
        throw EmbeddingError("circulant embedding has eigenvalue " +
                             std::to_string(lambda_min) + " below the clip rule " +
                             std::to_string(-1e-8 * lambda_max));
    }

    result->amp.resize(static_cast<std::size_t>(total));
    const double inv_n = 1.0 / static_cast<double>(total);
    long long clipped = 0;
    for (long long i = 0; i < total; ++i) {
        const double lambda = buf[i][0];
        if (lambda <= 0.0) {
            result->amp[static_cast<std::size_t>(i)] = 0.0;
            if (lambda < 0.0) ++clipped;
        } else {
            result->amp[static_cast<std::size_t>(i)] = std::sqrt(lambda * inv_n);
        }
    }
    result->info.clipped = clipped;
    fftw_free(buf);

    std::lock_guard<std::mutex> lock(g_cache_mutex);
    auto [it, inserted] = g_circulant_cache.emplace(key, std::move(result));
    (void)inserted;
    return it->second;
}

// Complex white noise xi, scaled by amp, backward FFT; the real part restricted
// to the window is a sample with the layer covariance (Dietrich-Newsam).
void add_circulant_layer(const LayerKey& key, double h, const Window& w, Rng& rng,
                         std::vector<double>& values) {
    const auto circ = circulant_amp(key, h);
    const long long lx = key.a, ly = key.b;
    const long long total = lx * ly;

    fftw_complex* buf = fftw_alloc_complex(static_cast<std::size_t>(total));
    if (buf == nullptr) {
        throw ResourceError("circulant sampling buffer allocation failed",
                            16 * total);
    }
    for (long long i = 0; i < total; ++i) {
        const double a = rng.normal();
        const double b = rng.normal();
        const double s = circ->amp[static_cast<std::size_t>(i)];
        buf[i][0] = s * a;
        buf[i][1] = s * b;
    }
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(g_fftw_mutex);
        plan = fftw_plan_dft_2d(static_cast<int>(ly), static_cast<int>(lx), buf,
                                buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(g_fftw_mutex);
        fftw_destroy_plan(plan);
    }

    for (long long jy = 0; jy < w.ny; ++jy) {
        double* row = values.data() + jy * w.nx;
        const fftw_complex* src = buf + jy * lx;
        for (long long jx = 0; jx < w.nx; ++jx) row[jx] += src[jx][0];
    }
    fftw_free(buf);
}

// ---- truncated kernel route ----

void add_truncated_layer(int k, const KernelSpec& kernel, double h, const Window& w,
                         std::uint64_t layer_seed, std::vector<double>& values) {
    for (int q = 0; q < kernel.time_slices; ++q) {
        const auto slice = field_detail::truncated_slice_kernel(k, q, kernel, h);
        const long long r = slice.radius_cells;
        const long long ext_nx = w.nx + 2 * r;
        const long long ext_ny = w.ny + 2 * r;
        std::vector<double> noise(static_cast<std::size_t>(ext_nx * ext_ny));
        Rng rng(mix_seed(layer_seed, static_cast<std::uint64_t>(q)));
        for (auto& g : noise) g = rng.normal();

        const long long span = 2 * r + 1;
        for (long long jy = 0; jy < w.ny; ++jy) {
            for (long long jx = 0; jx < w.nx; ++jx) {
                double acc = 0.0;
                for (long long dy = 0; dy < span; ++dy) {
                    const double* nrow = noise.data() + (jy + dy) * ext_nx + jx;
                    const double* wrow = slice.weights.data() + dy * span;
                    for (long long dx = 0; dx < span; ++dx) {
                        acc += wrow[dx] * nrow[dx];
                    }
                }
                values[static_cast<std::size_t>(jy * w.nx + jx)] += acc;
            }
        }
    }
}

// ---- memory guard ----

long long memory_budget_bytes() {
    if (const char* env = std::getenv("GFFNET_MEMORY_BUDGET_BYTES")) {
        const long long v = std::atoll(env);
        if (v > 0) return v;
    }
    return 3'500'000'000LL;
}

void check_memory(const GridSpec& grid, const KernelSpec& kernel, const Window& w) {
    long long biggest_layer = 0;
    if (kernel.kind == KernelKind::Full) {
        const double h = grid.refined_spacing();
        for (int k = kernel.m + 1; k <= kernel.n; ++k) {
            const Torus t = layer_torus(w, h, k);
            if (!layer_uses_dense(w, t)) {
                biggest_layer = std::max(biggest_layer, 24 * t.count());
            }
        }
    }
    const long long required = 8 * w.count() + biggest_layer;
    const long long budget = memory_budget_bytes();
    if (required > budget) {
        throw ResourceError("field synthesis needs about " +
                                std::to_string(required) + " bytes, over the " +
                                std::to_string(budget) + "-byte budget",
                            required);
    }
}

}  // namespace

// ---- public covariance evaluators ----

double layer_covariance(double r, int k) {
    if (r <= 0.0) return kLog2;
    const double r2 = r * r;
    const double lo = 0.5 * r2 * std::ldexp(1.0, 2 * (k - 1));
    const double hi = 0.5 * r2 * std::ldexp(1.0, 2 * k);
    return 0.5 * (exp_int_e1(lo) - exp_int_e1(hi));
}

double analytic_covariance(Vec2 x, Vec2 y, int m, int n) {
    if (m < 0 || n <= m) {
        throw ConfigError("analytic_covariance: need 0 <= m < n");
    }
    const double r = dist(x, y);
    if (r <= 0.0) return static_cast<double>(n - m) * kLog2;
    const double r2 = r * r;
    const double lo = 0.5 * r2 * std::ldexp(1.0, 2 * m);
    const double hi = 0.5 * r2 * std::ldexp(1.0, 2 * n);
    return 0.5 * (exp_int_e1(lo) - exp_int_e1(hi));
}

// ---- synthesis ----

FieldSample sample_field(const GridSpec& grid, const KernelSpec& kernel,
                         std::uint64_t seed, bool negate) {
    grid.validate();
    kernel.validate();

    FieldSample sample;
    sample.grid = grid;
    sample.kernel = kernel;
    sample.seed = seed;
    sample.negated = negate;

    const Window w = refined_window(grid);
    sample.i0 = w.i0;
    sample.j0 = w.j0;
    sample.nx = w.nx;
    sample.ny = w.ny;
    sample.values.assign(static_cast<std::size_t>(w.count()), 0.0);

    check_memory(grid, kernel, w);
    const double h = grid.refined_spacing();

    for (int k = kernel.m + 1; k <= kernel.n; ++k) {
        const std::uint64_t layer_seed = mix_seed(seed, static_cast<std::uint64_t>(k));
        if (kernel.kind == KernelKind::Truncated) {
            add_truncated_layer(k, kernel, h, w, layer_seed, sample.values);
            continue;
        }
        const Torus t = layer_torus(w, h, k);
        Rng rng(layer_seed);
        if (layer_uses_dense(w, t)) {
            LayerKey key{k, grid.n, grid.zeta, w.nx, w.ny};
            add_dense_layer(key, h, rng, sample.values);
        } else {
            LayerKey key{k, grid.n, grid.zeta, t.lx, t.ly};
            add_circulant_layer(key, h, w, rng, sample.values);
        }
    }

    if (negate) {
        for (auto& v : sample.values) v = -v;
    }
    return sample;
}

double oscillation(const FieldSample& sample, double eps, Rect region) {
    const double h = sample.spacing();
    if (eps < h) throw ConfigError("oscillation: eps below the lattice spacing");
    if (!sample.grid.box.contains(region, 1e-9)) {
        throw ConfigError("oscillation: region outside the sampled box");
    }
    // The region need not be lattice-aligned; take the lattice points inside it.
    const auto lo = [h](double x) {
        return static_cast<long long>(std::ceil(x / h - 1e-9));
    };
    const auto hi = [h](double x) {
        return static_cast<long long>(std::floor(x / h + 1e-9));
    };
    const long long lo_i = std::max(sample.i0, lo(region.x0));
    const long long hi_i = std::min(sample.i0 + sample.nx - 1, hi(region.x1));
    const long long lo_j = std::max(sample.j0, lo(region.y0));
    const long long hi_j = std::min(sample.j0 + sample.ny - 1, hi(region.y1));

    const long long reach = static_cast<long long>(std::floor(eps / h + 1e-9));
    const double eps2 = eps * eps * (1.0 + 1e-12);
    double best = 0.0;
    for (long long j = lo_j; j <= hi_j; ++j) {
        for (long long i = lo_i; i <= hi_i; ++i) {
            const double v = sample.value_at_index(i, j);
            // Scan the forward half-neighborhood; pairs are symmetric.
            for (long long dj = 0; dj <= reach; ++dj) {
                if (j + dj > hi_j) break;
                const long long di_lo = (dj == 0) ? 1 : -reach;
                for (long long di = di_lo; di <= reach; ++di) {
                    const long long ii = i + di;
                    if (ii < lo_i || ii > hi_i) continue;
                    const double d2 =
                        static_cast<double>(di * di + dj * dj) * h * h;
                    if (d2 > eps2) continue;
                    best = std::max(best,
                                    std::abs(v - sample.value_at_index(ii, j + dj)));
                }
            }
        }
    }
    return best;
}

void clear_field_caches() {
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    g_dense_cache.clear();
    g_circulant_cache.clear();
}

// ---- field_detail ----

namespace field_detail {

double bump(double x) {
    if (x <= 1.0) return 1.0;
    if (x >= 2.0) return 0.0;
    // f(s) = e^{-1/s} glue: smooth, 1 at x=1, 0 at x=2.
    const double f1 = std::exp(-1.0 / (2.0 - x));
    const double f2 = std::exp(-1.0 / (x - 1.0));
    return f1 / (f1 + f2);
}

double sigma_of_t(double t, double eps0) {
    if (t <= 0.0 || t >= 1.0) {
        return t == 1.0 ? 0.0 : eps0 * std::sqrt(t) *
                                    std::pow(std::abs(std::log(t)), eps0);
    }
    return eps0 * std::sqrt(t) * std::pow(-std::log(t), eps0);
}

SliceKernel truncated_slice_kernel(int layer_k, int slice_q, const KernelSpec& kernel,
                                   double h) {
    const int q_count = kernel.time_slices;
    if (slice_q < 0 || slice_q >= q_count) {
        throw ConfigError("truncated_slice_kernel: slice index out of range");
    }
    const double t_lo = std::ldexp(1.0, -2 * layer_k) *
                        std::pow(4.0, static_cast<double>(slice_q) / q_count);
    const double t_hi = std::ldexp(1.0, -2 * layer_k) *
                        std::pow(4.0, static_cast<double>(slice_q + 1) / q_count);

    SliceKernel slice;
    slice.t_mid = std::sqrt(t_lo * t_hi);  // midpoint in log scale
    slice.dt = t_hi - t_lo;
    const double s = 0.5 * slice.t_mid;  // the kernel in play is ptilde_{t/2}
    slice.sigma = sigma_of_t(s, kernel.eps0);
    slice.support_radius = 2.0 * slice.sigma;
    slice.radius_cells = static_cast<int>(std::ceil(slice.support_radius / h));

    const int span = 2 * slice.radius_cells + 1;
    slice.weights.assign(static_cast<std::size_t>(span) * span, 0.0);
    const double scale = kSqrtPi * h * std::sqrt(slice.dt) / (kTwoPi * s);
    for (int dy = -slice.radius_cells; dy <= slice.radius_cells; ++dy) {
        for (int dx = -slice.radius_cells; dx <= slice.radius_cells; ++dx) {
            const double r = h * std::hypot(dx, dy);
            if (r >= slice.support_radius) continue;  // exact finite range
            const double w =
                scale * std::exp(-r * r / (2.0 * s)) * bump(r / slice.sigma);
            slice.weights[static_cast<std::size_t>(dy + slice.radius_cells) * span +
                          (dx + slice.radius_cells)] = w;
        }
    }
    return slice;
}

EmbeddingInfo circulant_embedding_info(const GridSpec& grid, int layer_k) {
    grid.validate();
    const Window w = refined_window(grid);
    const double h = grid.refined_spacing();
    const Torus t = layer_torus(w, h, layer_k);
    LayerKey key{layer_k, grid.n, grid.zeta, t.lx, t.ly};
    return circulant_amp(key, h)->info;
}

bool dense_route(long long n_box, long long n_torus) {
    return n_box <= kDenseMaxPoints && n_torus >= kDenseTorusRatio * n_box;
}

long long dense_layer_rank(const GridSpec& grid, int layer_k) {
    grid.validate();
    const Window w = refined_window(grid);
    LayerKey key{layer_k, grid.n, grid.zeta, w.nx, w.ny};
    return dense_factor(key, grid.refined_spacing())->cols.cols();
}

double layer_padding(int layer_k) { return 8.0 * std::ldexp(1.0, -(layer_k - 1)); }

RouteOverride::RouteOverride(Route r) { g_route_override = r; }
RouteOverride::~RouteOverride() { g_route_override = Route::Automatic; }

}  // namespace field_detail

}  // namespace gffnet
