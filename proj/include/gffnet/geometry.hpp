// geometry.hpp — points, boxes, and the rescaled-lattice bookkeeping.
//
// The model lives on Z_n^2 = 2^{-n} zeta^{-1} Z^2. Field samples live on the
// refined half-lattice with spacing 2^{-(n+1)} zeta^{-1}, which contains every
// vertex, edge midpoint, and face center of Z_n^2. All lattice arithmetic is
// carried out in integer refined-lattice indices; doubles only enter when
// converting to physical coordinates.
#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "gffnet/errors.hpp"

namespace gffnet {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }

inline double dist(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }
inline double linf_dist(Vec2 a, Vec2 b) {
    return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y));
}

// Axis-aligned closed box [x0,x1] x [y0,y1].
struct Rect {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

    // B(a,b) = [-a,a] x [-b,b] from the model definition.
    static Rect centered(double a, double b) { return {-a, -b, a, b}; }

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    bool contains(Vec2 p, double tol = 0.0) const {
        return p.x >= x0 - tol && p.x <= x1 + tol && p.y >= y0 - tol && p.y <= y1 + tol;
    }
    bool contains(const Rect& r, double tol = 0.0) const {
        return r.x0 >= x0 - tol && r.x1 <= x1 + tol && r.y0 >= y0 - tol && r.y1 <= y1 + tol;
    }
};

// Round x/unit to the nearest integer and insist it is exact (up to fp slack).
inline long long snap_index(double x, double unit, const char* what) {
    const double q = x / unit;
    const double r = std::round(q);
    if (std::abs(q - r) > 1e-6) {
        throw ConfigError(std::string(what) + " = " + std::to_string(x) +
                          " is not aligned to the lattice unit " + std::to_string(unit));
    }
    return static_cast<long long>(r);
}

// Default mesh-refinement rule zeta_n = ceil(sqrt(n)).
inline int default_zeta(int n) {
    int z = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    return z < 1 ? 1 : z;
}

// Geometry of one sampled field: scale index n, mesh multiplier zeta, box.
struct GridSpec {
    int n = 1;
    int zeta = 1;
    Rect box;
    // Explicit zeta below sqrt(n) is allowed only with this flag (model requires
    // zeta_n >= sqrt(n); experiments occasionally want coarser meshes).
    bool zeta_override = false;

    double primal_spacing() const { return std::ldexp(1.0, -n) / zeta; }
    double refined_spacing() const { return std::ldexp(1.0, -(n + 1)) / zeta; }

    void validate() const {
        if (n < 1) throw ConfigError("GridSpec: n must be >= 1");
        if (zeta < 1) throw ConfigError("GridSpec: zeta must be >= 1");
        if (!zeta_override && zeta * zeta < n) {
            throw ConfigError("GridSpec: zeta < sqrt(n) requires zeta_override");
        }
        if (!(box.x1 > box.x0) || !(box.y1 > box.y0)) {
            throw ConfigError("GridSpec: box must have positive extent");
        }
        // Box corners must sit on Z_n^2 so that side lengths are integer
        // multiples of the spacing and the lattice/midpoint sets are well defined.
        const double s = primal_spacing();
        snap_index(box.x0, s, "box.x0");
        snap_index(box.x1, s, "box.x1");
        snap_index(box.y0, s, "box.y0");
        snap_index(box.y1, s, "box.y1");
    }
};

}  // namespace gffnet
