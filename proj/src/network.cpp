// network.cpp — lattice network construction, planar duals, annulus views.
#include "gffnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <utility>

#include "gffnet/errors.hpp"

namespace gffnet {

namespace {

constexpr double kLogResistanceGuard = 700.0;  // |log r| beyond this overflows exp()

long long ceil_index(double x, double h) {
    return static_cast<long long>(std::ceil(x / h - 1e-6));
}
long long floor_index(double x, double h) {
    return static_cast<long long>(std::floor(x / h + 1e-6));
}

std::string rect_string(const Rect& r) {
    std::ostringstream os;
    os << "[" << r.x0 << "," << r.x1 << "]x[" << r.y0 << "," << r.y1 << "]";
    return os.str();
}

// Decoded lattice index of a vertex of a full-rectangle network.
struct LatticeIx {
    long long ix = 0, iy = 0;
};
LatticeIx decode(const LatticeInfo& lat, int v) {
    return {v % lat.nx, v / lat.nx};
}

// Integer L-inf geometry of an annulus request, all in lattice units.
struct AnnulusFrame {
    long long ic = 0, jc = 0;    // center vertex index
    long long k_in = 0, k_out = 0;  // radii in lattice units
    double spacing = 0.0;
};

AnnulusFrame annulus_frame(const Network& net, Vec2 center, double r_inner,
                           double r_outer) {
    const LatticeInfo& lat = net.lattice;
    if (!lat.valid) {
        throw ConfigError("annulus views require a full-rectangle lattice network");
    }
    AnnulusFrame f;
    f.spacing = lat.spacing;
    f.ic = snap_index(center.x - lat.origin.x, f.spacing, "annulus center x");
    f.jc = snap_index(center.y - lat.origin.y, f.spacing, "annulus center y");
    f.k_in = snap_index(r_inner, f.spacing, "annulus inner radius");
    f.k_out = snap_index(r_outer, f.spacing, "annulus outer radius");
    if (f.k_in < 1 || f.k_out < f.k_in) {
        throw ConfigError("annulus radii must satisfy spacing <= r_inner <= r_outer");
    }
    // The ring plus one extra lattice layer must stay inside the rectangle.
    if (f.ic - f.k_out < 1 || f.jc - f.k_out < 1 || f.ic + f.k_out > lat.nx - 2 ||
        f.jc + f.k_out > lat.ny - 2) {
        throw ConfigError("annulus touches the network boundary");
    }
    return f;
}

long long linf_units(const AnnulusFrame& f, long long ix, long long iy) {
    return std::max(std::llabs(ix - f.ic), std::llabs(iy - f.jc));
}

}  // namespace

void Terminals::validate(const Network& net) const {
    if (a.empty() || z.empty()) {
        throw ConfigError("terminals: both groups must be nonempty");
    }
    std::vector<char> in_a(net.coords.size(), 0);
    for (int v : a) {
        if (v < 0 || v >= net.vertex_count()) {
            throw ConfigError("terminals: vertex index out of range");
        }
        in_a[static_cast<std::size_t>(v)] = 1;
    }
    for (int v : z) {
        if (v < 0 || v >= net.vertex_count()) {
            throw ConfigError("terminals: vertex index out of range");
        }
        if (in_a[static_cast<std::size_t>(v)]) {
            throw ConfigError("terminals: source and sink groups must be disjoint");
        }
    }
}

Adjacency build_adjacency(const Network& net) {
    const int nv = net.vertex_count();
    Adjacency adj;
    adj.offsets.assign(static_cast<std::size_t>(nv) + 1, 0);
    for (const NetEdge& e : net.edges) {
        ++adj.offsets[static_cast<std::size_t>(e.u) + 1];
        ++adj.offsets[static_cast<std::size_t>(e.v) + 1];
    }
    for (int v = 0; v < nv; ++v) adj.offsets[v + 1] += adj.offsets[v];
    adj.neighbor.resize(adj.offsets[nv]);
    adj.edge_id.resize(adj.offsets[nv]);
    std::vector<int> cursor(adj.offsets.begin(), adj.offsets.end() - 1);
    for (int id = 0; id < net.edge_count(); ++id) {
        const NetEdge& e = net.edges[static_cast<std::size_t>(id)];
        adj.neighbor[cursor[e.u]] = e.v;
        adj.edge_id[cursor[e.u]++] = id;
        adj.neighbor[cursor[e.v]] = e.u;
        adj.edge_id[cursor[e.v]++] = id;
    }
    return adj;
}

Network build_network(const FieldSample& sample, double gamma, Rect box, int zeta) {
    const GridSpec& grid = sample.grid;
    if (gamma < 0.0) throw ConfigError("build_network: gamma must be >= 0");
    const int zeta_t = zeta == 0 ? grid.zeta : zeta;
    if (zeta_t < 1 || grid.zeta % zeta_t != 0) {
        throw ConfigError("build_network: target mesh must divide the sample mesh");
    }
    const double h = std::ldexp(1.0, -grid.n) / zeta_t;  // target lattice spacing
    const long long rho = 2LL * grid.zeta / zeta_t;  // refined cells per target cell
    if (!grid.box.contains(box, 1e-9 * h)) {
        throw OffLatticeError("build_network: box not contained in the sampled field");
    }

    const long long ix_lo = ceil_index(box.x0, h), ix_hi = floor_index(box.x1, h);
    const long long iy_lo = ceil_index(box.y0, h), iy_hi = floor_index(box.y1, h);
    const long long nxv = ix_hi - ix_lo + 1, nyv = iy_hi - iy_lo + 1;
    if (nxv < 1 || nyv < 1) {
        throw ConfigError("build_network: box contains no lattice points");
    }
    if (nxv * nyv < 2) {
        throw ConfigError("build_network: box contains no lattice edges");
    }

    Network net;
    net.coords.reserve(static_cast<std::size_t>(nxv * nyv));
    for (long long j = iy_lo; j <= iy_hi; ++j) {
        for (long long i = ix_lo; i <= ix_hi; ++i) {
            net.coords.push_back({static_cast<double>(i) * h, static_cast<double>(j) * h});
        }
    }

    net.edges.reserve(static_cast<std::size_t>(2 * nxv * nyv));
    double max_abs_log_r = 0.0;
    for (long long j = iy_lo; j <= iy_hi; ++j) {
        for (long long i = ix_lo; i <= ix_hi; ++i) {
            const int vid = static_cast<int>((j - iy_lo) * nxv + (i - ix_lo));
            if (i < ix_hi) {  // horizontal edge to (i+1, j)
                NetEdge e;
                e.u = vid;
                e.v = vid + 1;
                e.midpoint = {(static_cast<double>(i) + 0.5) * h, static_cast<double>(j) * h};
                e.log_r = gamma * sample.value_at_index(i * rho + rho / 2, j * rho);
                max_abs_log_r = std::max(max_abs_log_r, std::abs(e.log_r));
                net.edges.push_back(e);
            }
            if (j < iy_hi) {  // vertical edge to (i, j+1)
                NetEdge e;
                e.u = vid;
                e.v = vid + static_cast<int>(nxv);
                e.midpoint = {static_cast<double>(i) * h, (static_cast<double>(j) + 0.5) * h};
                e.log_r = gamma * sample.value_at_index(i * rho, j * rho + rho / 2);
                max_abs_log_r = std::max(max_abs_log_r, std::abs(e.log_r));
                net.edges.push_back(e);
            }
        }
    }
    if (max_abs_log_r >= kLogResistanceGuard) {
        throw ConfigError("build_network: |gamma * field| exceeds the overflow guard");
    }

    net.lattice.valid = true;
    net.lattice.nx = nxv;
    net.lattice.ny = nyv;
    net.lattice.origin = {static_cast<double>(ix_lo) * h, static_cast<double>(iy_lo) * h};
    net.lattice.spacing = h;
    net.lattice.n = grid.n;
    net.lattice.zeta = zeta_t;
    net.lattice.gamma = gamma;

    std::ostringstream prov;
    prov << "lattice n=" << grid.n << " zeta=" << zeta_t << " gamma=" << gamma
         << " box=" << rect_string(box) << " seed=" << sample.seed
         << (sample.negated ? " negated" : "");
    net.provenance = prov.str();
    return net;
}

Terminals left_right(const Network& net) {
    const LatticeInfo& lat = net.lattice;
    if (!lat.valid) throw ConfigError("left_right: not a full-rectangle lattice network");
    Terminals t;
    for (long long iy = 0; iy < lat.ny; ++iy) {
        t.a.push_back(static_cast<int>(lat.vertex(0, iy)));
        t.z.push_back(static_cast<int>(lat.vertex(lat.nx - 1, iy)));
    }
    return t;
}

Terminals up_down(const Network& net) {
    const LatticeInfo& lat = net.lattice;
    if (!lat.valid) throw ConfigError("up_down: not a full-rectangle lattice network");
    Terminals t;
    for (long long ix = 0; ix < lat.nx; ++ix) {
        t.a.push_back(static_cast<int>(lat.vertex(ix, lat.ny - 1)));
        t.z.push_back(static_cast<int>(lat.vertex(ix, 0)));
    }
    return t;
}

Terminals supernode_terminals(const Network& net) {
    if (net.supernodes.size() != 2) {
        throw ConfigError("supernode_terminals: network does not carry two terminal groups");
    }
    Terminals t{net.supernodes[0], net.supernodes[1]};
    t.validate(net);
    return t;
}

Network dual_network(const Network& net) {
    const LatticeInfo& lat = net.lattice;
    if (!lat.valid || lat.nx < 2 || lat.ny < 1) {
        throw ConfigError("dual_network: requires a full-rectangle lattice network");
    }
    if (!net.supernodes.empty()) {
        // If the input carries terminals they must be the left/right columns.
        Terminals lr = left_right(net);
        auto sorted = [](std::vector<int> v) {
            std::sort(v.begin(), v.end());
            return v;
        };
        if (net.supernodes.size() != 2 ||
            !((sorted(net.supernodes[0]) == sorted(lr.a) &&
               sorted(net.supernodes[1]) == sorted(lr.z)) ||
              (sorted(net.supernodes[0]) == sorted(lr.z) &&
               sorted(net.supernodes[1]) == sorted(lr.a)))) {
            throw ConfigError("dual_network: terminals must be the left and right columns");
        }
    }

    const long long W = lat.nx - 1;  // cells across
    const long long H = lat.ny - 1;  // cells up
    Network dual;
    dual.coords.reserve(static_cast<std::size_t>(W * H) + 2);
    for (long long fy = 0; fy < H; ++fy) {
        for (long long fx = 0; fx < W; ++fx) {
            dual.coords.push_back(lat.origin + lat.spacing * Vec2{static_cast<double>(fx) + 0.5,
                                                                  static_cast<double>(fy) + 0.5});
        }
    }
    const int bottom = static_cast<int>(W * H);
    const int top = bottom + 1;
    const double mid_x = lat.origin.x + 0.5 * lat.spacing * static_cast<double>(W);
    dual.coords.push_back({mid_x, lat.origin.y - lat.spacing});
    dual.coords.push_back({mid_x, lat.origin.y + lat.spacing * (static_cast<double>(H) + 1.0)});
    auto face = [&](long long fx, long long fy) { return static_cast<int>(fy * W + fx); };

    for (const NetEdge& e : net.edges) {
        LatticeIx a = decode(lat, e.u), b = decode(lat, e.v);
        if (a.ix > b.ix || a.iy > b.iy) std::swap(a, b);
        NetEdge de;
        de.midpoint = e.midpoint;
        de.log_r = -e.log_r;
        if (a.iy == b.iy) {  // horizontal primal edge: dual connects below <-> above
            de.u = a.iy == 0 ? bottom : face(a.ix, a.iy - 1);
            de.v = a.iy == lat.ny - 1 ? top : face(a.ix, a.iy);
        } else {  // vertical primal edge
            if (a.ix == 0 || a.ix == lat.nx - 1) continue;  // interior to a terminal
            de.u = face(a.ix - 1, a.iy);
            de.v = face(a.ix, a.iy);
        }
        dual.edges.push_back(de);
    }

    dual.supernodes = {{top}, {bottom}};
    dual.provenance = "face dual of: " + net.provenance;
    return dual;
}

AnnulusView annulus_views(const Network& net, Vec2 center, double r_inner,
                          double r_outer, SlitSide side) {
    const AnnulusFrame f = annulus_frame(net, center, r_inner, r_outer);
    const LatticeInfo& lat = net.lattice;

    // Ring vertex selection, row-major for determinism.
    std::vector<int> new_id(net.coords.size(), -1);
    std::vector<int> inner_ring, outer_ring;
    Network across;
    for (long long iy = f.jc - f.k_out; iy <= f.jc + f.k_out; ++iy) {
        for (long long ix = f.ic - f.k_out; ix <= f.ic + f.k_out; ++ix) {
            const long long d = linf_units(f, ix, iy);
            if (d < f.k_in || d > f.k_out) continue;
            const int old_id = static_cast<int>(lat.vertex(ix, iy));
            new_id[static_cast<std::size_t>(old_id)] = across.vertex_count();
            if (d == f.k_in) inner_ring.push_back(across.vertex_count());
            if (d == f.k_out) outer_ring.push_back(across.vertex_count());
            across.coords.push_back(net.coords[static_cast<std::size_t>(old_id)]);
        }
    }

    for (const NetEdge& e : net.edges) {
        const int nu = new_id[static_cast<std::size_t>(e.u)];
        const int nv = new_id[static_cast<std::size_t>(e.v)];
        if (nu < 0 || nv < 0) continue;
        across.edges.push_back({nu, nv, e.midpoint, e.log_r});
    }
    if (f.k_in < f.k_out) across.supernodes = {inner_ring, outer_ring};
    {
        std::ostringstream prov;
        prov << "annulus across r_in=" << r_inner << " r_out=" << r_outer
             << " of: " << net.provenance;
        across.provenance = prov.str();
    }

    // Around view: cut the ring open through the slit vertices (x = c_x ± dx,
    // y = c_y, dx in [r_in, r_out]). Each slit vertex is duplicated; an edge
    // reaching the slit from the upper half-plane moves to the duplicate, one
    // from below stays on the original, and an edge joining two slit vertices
    // lies along the cut itself and is dropped (both its endpoints are
    // terminals, so it could never carry current). Terminals are the two
    // copies of the slit row.
    Network around;
    around.coords = across.coords;
    std::vector<int> slit_row, duplicate_row;
    std::vector<int> dup_of(net.coords.size(), -1);
    for (long long dx = f.k_in; dx <= f.k_out; ++dx) {
        const long long ix = side == SlitSide::PositiveX ? f.ic + dx : f.ic - dx;
        const int slit_old = static_cast<int>(lat.vertex(ix, f.jc));
        slit_row.push_back(new_id[static_cast<std::size_t>(slit_old)]);
        dup_of[static_cast<std::size_t>(slit_old)] = around.vertex_count();
        duplicate_row.push_back(around.vertex_count());
        around.coords.push_back(net.coords[static_cast<std::size_t>(slit_old)]);
    }
    for (const NetEdge& e : net.edges) {
        const int nu = new_id[static_cast<std::size_t>(e.u)];
        const int nv = new_id[static_cast<std::size_t>(e.v)];
        if (nu < 0 || nv < 0) continue;
        const bool u_slit = dup_of[static_cast<std::size_t>(e.u)] >= 0;
        const bool v_slit = dup_of[static_cast<std::size_t>(e.v)] >= 0;
        if (u_slit && v_slit) continue;  // runs along the cut
        if (!u_slit && !v_slit) {
            around.edges.push_back({nu, nv, e.midpoint, e.log_r});
            continue;
        }
        const int slit_old = u_slit ? e.u : e.v;
        const int other_old = u_slit ? e.v : e.u;
        const LatticeIx o = decode(lat, other_old);
        const int slit_new = o.iy > f.jc
                                 ? dup_of[static_cast<std::size_t>(slit_old)]
                                 : new_id[static_cast<std::size_t>(slit_old)];
        around.edges.push_back({slit_new, new_id[static_cast<std::size_t>(other_old)],
                                e.midpoint, e.log_r});
    }
    around.supernodes = {slit_row, duplicate_row};
    {
        std::ostringstream prov;
        prov << "annulus around r_in=" << r_inner << " r_out=" << r_outer << " slit="
             << (side == SlitSide::PositiveX ? "+x" : "-x") << " of: " << net.provenance;
        around.provenance = prov.str();
    }

    return {std::move(across), std::move(around)};
}

Network annulus_dual(const Network& net, Vec2 center, double r_inner, double r_outer,
                     SlitSide side) {
    const AnnulusFrame f = annulus_frame(net, center, r_inner, r_outer);
    const LatticeInfo& lat = net.lattice;

    // Faces (unit cells, keyed by their lower-left vertex) classified by the
    // L-inf distance of their center: hole, ring face, or outside.
    std::map<std::pair<long long, long long>, int> face_id;
    Network dual;
    for (long long fy = f.jc - f.k_out; fy < f.jc + f.k_out; ++fy) {
        for (long long fx = f.ic - f.k_out; fx < f.ic + f.k_out; ++fx) {
            // Doubled distance of the face center keeps the classification exact.
            const long long dd = std::max(std::llabs(2 * (fx - f.ic) + 1),
                                          std::llabs(2 * (fy - f.jc) + 1));
            if (dd < 2 * f.k_in || dd > 2 * f.k_out) continue;
            face_id[{fx, fy}] = dual.vertex_count();
            dual.coords.push_back(lat.origin +
                                  lat.spacing * Vec2{static_cast<double>(fx) + 0.5,
                                                     static_cast<double>(fy) + 0.5});
        }
    }
    const int hole = dual.vertex_count();
    const int outer = hole + 1;
    dual.coords.push_back(center);
    dual.coords.push_back({center.x, center.y + r_outer + lat.spacing});

    auto cell_node = [&](long long fx, long long fy) {
        const long long dd = std::max(std::llabs(2 * (fx - f.ic) + 1),
                                      std::llabs(2 * (fy - f.jc) + 1));
        if (dd < 2 * f.k_in) return hole;
        if (dd > 2 * f.k_out) return outer;
        return face_id.at({fx, fy});
    };

    // Edges lying along the around-view slit (horizontal, joining two slit
    // vertices) are dropped from the cut-open strip, so their dual edges are
    // omitted here; this makes the dual below the exact face dual of the
    // around view and R(around) * R_dual(hole, outer) = 1 an exact identity.
    auto on_slit = [&](long long ix, long long iy) {
        if (iy != f.jc) return false;
        const long long dx = side == SlitSide::PositiveX ? ix - f.ic : f.ic - ix;
        return dx >= f.k_in && dx <= f.k_out;
    };

    for (const NetEdge& e : net.edges) {
        LatticeIx a = decode(lat, e.u), b = decode(lat, e.v);
        if (a.ix > b.ix || a.iy > b.iy) std::swap(a, b);
        if (linf_units(f, a.ix, a.iy) < f.k_in || linf_units(f, a.ix, a.iy) > f.k_out ||
            linf_units(f, b.ix, b.iy) < f.k_in || linf_units(f, b.ix, b.iy) > f.k_out) {
            continue;  // not an edge of the ring network
        }
        if (on_slit(a.ix, a.iy) && on_slit(b.ix, b.iy)) continue;
        int du, dv;
        if (a.iy == b.iy) {  // horizontal edge: cells below and above
            du = cell_node(a.ix, a.iy - 1);
            dv = cell_node(a.ix, a.iy);
        } else {  // vertical edge: cells left and right
            du = cell_node(a.ix - 1, a.iy);
            dv = cell_node(a.ix, a.iy);
        }
        if (du == dv) continue;  // defensive; cannot happen for ring edges
        dual.edges.push_back({du, dv, e.midpoint, -e.log_r});
    }

    dual.supernodes = {{hole}, {outer}};
    std::ostringstream prov;
    prov << "annulus dual r_in=" << r_inner << " r_out=" << r_outer
         << " of: " << net.provenance;
    dual.provenance = prov.str();
    return dual;
}

std::vector<int> edges_within(const Network& net, Vec2 center, double radius) {
    const double tol = 1e-6 * (net.lattice.valid ? net.lattice.spacing : 1.0);
    std::vector<int> ids;
    for (int id = 0; id < net.edge_count(); ++id) {
        const NetEdge& e = net.edges[static_cast<std::size_t>(id)];
        if (linf_dist(net.coords[static_cast<std::size_t>(e.u)], center) <= radius + tol &&
            linf_dist(net.coords[static_cast<std::size_t>(e.v)], center) <= radius + tol) {
            ids.push_back(id);
        }
    }
    return ids;
}

std::vector<int> annulus_edges(const Network& net, Vec2 center, double r_inner,
                               double r_outer, bool drop_inner_ring) {
    const double tol = 1e-6 * (net.lattice.valid ? net.lattice.spacing : 1.0);
    std::vector<int> ids;
    for (int id = 0; id < net.edge_count(); ++id) {
        const NetEdge& e = net.edges[static_cast<std::size_t>(id)];
        const double du = linf_dist(net.coords[static_cast<std::size_t>(e.u)], center);
        const double dv = linf_dist(net.coords[static_cast<std::size_t>(e.v)], center);
        if (du < r_inner - tol || du > r_outer + tol) continue;
        if (dv < r_inner - tol || dv > r_outer + tol) continue;
        if (drop_inner_ring && du <= r_inner + tol && dv <= r_inner + tol) continue;
        ids.push_back(id);
    }
    return ids;
}

Network edge_subnetwork(const Network& net, const std::vector<int>& edge_ids) {
    Network sub;
    sub.coords = net.coords;
    sub.supernodes = net.supernodes;
    sub.lattice = net.lattice;
    sub.edges.reserve(edge_ids.size());
    for (int id : edge_ids) {
        if (id < 0 || id >= net.edge_count()) {
            throw ConfigError("edge_subnetwork: edge id out of range");
        }
        sub.edges.push_back(net.edges[static_cast<std::size_t>(id)]);
    }
    sub.provenance = "edge subnetwork of: " + net.provenance;
    return sub;
}

}  // namespace gffnet
