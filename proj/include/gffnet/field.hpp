// field.hpp — white-noise band approximations of the 2D Gaussian free field.
//
// phi_{m,n}(x) = sqrt(pi) * int_{2^{-2n}}^{2^{-2m}} int p_{t/2}(x,y) W(dy,dt)
// is a smooth stationary Gaussian field with Var = (n-m) log 2 and two-point
// covariance  int_{r^2/(2 delta_m^2)}^{r^2/(2 delta_n^2)} e^{-s}/(2s) ds,
// delta_k = 2^{-k}, r = |x-y|.  The truncated variant psi_{m,n} replaces the
// heat kernel p_t by p_t(x,y) * Phi(|x-y|/sigma_t), sigma_t = eps0 sqrt(t)
// |log t|^{eps0}, making far-apart values exactly independent.
//
// Samples decompose into independent dyadic layers k = m+1..n; layer k has
// covariance pi * int_{2^{-2k}}^{2^{-2(k-1)}} p_t(x-y) dt and carries its own
// noise stream derived from (seed, k), so a range-(0,m) and a range-(m,n)
// sample of the same master seed sum to the range-(0,n) sample.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gffnet/geometry.hpp"

namespace gffnet {

enum class KernelKind { Full, Truncated };

struct KernelSpec {
    int m = 0;
    int n = 1;
    KernelKind kind = KernelKind::Full;
    double eps0 = 0.01;   // truncation constant epsilon_0 = 1/100
    int time_slices = 8;  // log-uniform midpoint slices per layer (truncated kernel)

    int layer_count() const { return n - m; }
    void validate() const {
        if (m < 0 || n <= m) throw ConfigError("KernelSpec: need 0 <= m < n");
        if (kind == KernelKind::Truncated && time_slices < 1) {
            throw ConfigError("KernelSpec: time_slices must be >= 1");
        }
    }
};

// A realized field on the refined lattice (spacing 2^{-(n+1)}/zeta) inside the box.
struct FieldSample {
    GridSpec grid;
    KernelSpec kernel;
    std::uint64_t seed = 0;
    bool negated = false;

    // Index window of the refined lattice: global index i in [i0, i0+nx),
    // j in [j0, j0+ny); point (i,j) sits at (i*h, j*h), h = refined spacing.
    long long i0 = 0, j0 = 0;
    long long nx = 0, ny = 0;
    std::vector<double> values;  // row-major, j outer, i inner

    double spacing() const { return grid.refined_spacing(); }

    double value_at_index(long long i, long long j) const {
        if (i < i0 || i >= i0 + nx || j < j0 || j >= j0 + ny) {
            throw OffLatticeError("field index outside sampled window");
        }
        return values[static_cast<std::size_t>((j - j0) * nx + (i - i0))];
    }

    // Exact lattice lookup; throws OffLatticeError for points not on the grid.
    double value_at(Vec2 p) const {
        const double h = spacing();
        const long long i = snap_lattice(p.x, h);
        const long long j = snap_lattice(p.y, h);
        return value_at_index(i, j);
    }

    Vec2 point(long long i, long long j) const {
        const double h = spacing();
        return {static_cast<double>(i) * h, static_cast<double>(j) * h};
    }

  private:
    static long long snap_lattice(double x, double h) {
        const double q = x / h;
        const double r = std::round(q);
        if (std::abs(q - r) > 1e-6) {
            throw OffLatticeError("point not on the sampled lattice");
        }
        return static_cast<long long>(r);
    }
};

// Synthesize a sample. Deterministic in (grid, kernel, seed, negate).
FieldSample sample_field(const GridSpec& grid, const KernelSpec& kernel,
                         std::uint64_t seed, bool negate = false);

// Full-kernel covariance E[phi_{m,n}(x) phi_{m,n}(y)], exact via exponential
// integrals: (E1(r^2 4^m/2) - E1(r^2 4^n/2))/2, and (n-m) log 2 at r = 0.
double analytic_covariance(Vec2 x, Vec2 y, int m, int n);

// Covariance of one dyadic layer k: pi * int_{4^{-k}}^{4^{-(k-1)}} p_t(r) dt.
double layer_covariance(double r, int k);

// sup |f(x)-f(y)| over sampled lattice pairs with |x-y| <= eps inside region.
double oscillation(const FieldSample& sample, double eps, Rect region);

// Two-file persistence: <prefix>.meta (text) + <prefix>.f64 (raw little-endian
// float64, row-major). Round-trips bit-exactly.
void save_field(const FieldSample& sample, const std::string& path_prefix);
FieldSample load_field(const std::string& path_prefix);

// Drop memoized circulant spectra / Cholesky factors (frees memory in tests).
void clear_field_caches();

namespace field_detail {

// Smooth radial bump: 1 on [0,1], 0 on [2,inf), C^infinity in between.
double bump(double x);

// sigma_t = eps0 sqrt(t) |log t|^{eps0}.
double sigma_of_t(double t, double eps0);

// One time slice of the truncated-kernel synthesis for layer k. The weights
// array is the discrete convolution stencil on the refined grid: exactly zero
// beyond the support radius 2*sigma_{t/2}.
struct SliceKernel {
    double t_mid = 0;           // integrand time t* (midpoint in log scale)
    double dt = 0;              // slice width
    double sigma = 0;           // sigma_{t*/2}
    double support_radius = 0;  // 2*sigma (physical units)
    int radius_cells = 0;       // stencil half-width in grid cells
    std::vector<double> weights;  // (2*radius_cells+1)^2, row-major
};
SliceKernel truncated_slice_kernel(int layer_k, int slice_q, const KernelSpec& kernel,
                                   double h);

// Diagnostics of the circulant embedding used for (layer, torus) geometry.
struct EmbeddingInfo {
    long long lx = 0, ly = 0;  // torus dimensions in cells
    double lambda_min = 0, lambda_max = 0;
    long long clipped = 0;  // number of negative eigenvalues clipped to zero
};
// Runs (or fetches from cache) the embedding for layer k on the torus that
// sample_field would use for the given grid; test hook for the PSD invariant.
EmbeddingInfo circulant_embedding_info(const GridSpec& grid, int layer_k);

// Route predicate (pivoted dense Cholesky vs circulant embedding), a pure
// function of geometry so identical inputs always take identical routes.
bool dense_route(long long n_box, long long n_torus);

// Rank of the pivoted-Cholesky factor the dense route uses for this layer.
long long dense_layer_rank(const GridSpec& grid, int layer_k);

// Per-side torus padding for layer k: eight standard widths 8*2^{-(k-1)}.
double layer_padding(int layer_k);

// Test hook: force one synthesis route for every layer (RAII, not thread-safe).
enum class Route { Automatic, ForceDense, ForceCirculant };
struct RouteOverride {
    explicit RouteOverride(Route r);
    ~RouteOverride();
};

}  // namespace field_detail

}  // namespace gffnet
