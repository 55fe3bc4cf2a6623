// network.hpp — resistor networks on Z_n^2, planar duals, annulus views.
//
// Edges carry log-resistances (log r_e = gamma * phi(m_e)); solvers consume
// conductances exp(-log r). Terminal groups are realized by index contraction
// when solving, never by zero-resistance edges.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gffnet/field.hpp"
#include "gffnet/geometry.hpp"

namespace gffnet {

struct NetEdge {
    int u = 0;
    int v = 0;
    Vec2 midpoint;     // physical midpoint m_e (dual edges keep the primal one)
    double log_r = 0;  // log resistance

    double resistance() const { return std::exp(log_r); }
    double conductance() const { return std::exp(-log_r); }
};

// Bookkeeping for networks that are full rectangles of a lattice: vertex
// (ix, iy) with ix in [0,nx), iy in [0,ny) has id iy*nx + ix and sits at
// origin + spacing*(ix, iy).
struct LatticeInfo {
    bool valid = false;
    long long nx = 0, ny = 0;  // vertex counts per side
    Vec2 origin;               // position of vertex (0,0)
    double spacing = 0.0;
    int n = 0, zeta = 0;       // scale bookkeeping for provenance/normalization
    double gamma = 0.0;

    long long vertex(long long ix, long long iy) const { return iy * nx + ix; }
};

struct Network {
    std::vector<Vec2> coords;
    std::vector<NetEdge> edges;
    std::vector<std::vector<int>> supernodes;  // optional terminal groups (0..2)
    std::string provenance;
    LatticeInfo lattice;

    int vertex_count() const { return static_cast<int>(coords.size()); }
    int edge_count() const { return static_cast<int>(edges.size()); }
};

struct Terminals {
    std::vector<int> a;  // source group A
    std::vector<int> z;  // sink group Z

    void validate(const Network& net) const;
};

// CSR-style adjacency: for vertex v, incident (neighbor, edge id) pairs.
struct Adjacency {
    std::vector<int> offsets;  // size nv+1
    std::vector<int> neighbor;
    std::vector<int> edge_id;

    int degree(int v) const { return offsets[v + 1] - offsets[v]; }
};
Adjacency build_adjacency(const Network& net);

// Vertices = Z_n^2(zeta) ∩ box, edges = nearest-neighbor pairs inside box,
// log r_e = gamma * sample(m_e). `zeta` defaults (0) to the sample's mesh; a
// coarser target mesh is allowed when it divides the sample mesh, so networks
// on different meshes can share one realization (mesh-comparison experiments).
Network build_network(const FieldSample& sample, double gamma, Rect box,
                      int zeta = 0);

// Terminal groups of full-rectangle networks.
Terminals left_right(const Network& net);
Terminals up_down(const Network& net);
// The terminal groups a network carries in `supernodes` (dual/annulus views).
Terminals supernode_terminals(const Network& net);

// Face dual of a full W x H-cell rectangle with left/right terminals: W*H face
// vertices plus top and bottom outer nodes, one dual edge per primal edge not
// interior to a terminal supernode, dual log r = -(primal log r), midpoint
// preserved. Terminals (carried in supernodes) are {top}, {bottom}.
Network dual_network(const Network& net);

struct AnnulusView {
    Network across;  // annulus-restricted network; terminals inner/outer rings
    Network around;  // ring cut open through the slit vertices; terminals =
                     // the two copies of the slit row
};

// Which side of the center the slit leaves on. The default is the positive
// x-axis; the mirrored slit exists so tests can exercise the construction from
// both sides.
enum class SlitSide { PositiveX, NegativeX };

// The L-infinity annulus {r_in <= |x - center| <= r_out} of a lattice network.
// Radii must be multiples of the lattice spacing; the annulus (plus its outer
// ring) must lie strictly inside the network rectangle. The around view cuts
// the ring open along the horizontal slit from inner to outer radius:
// each slit vertex is duplicated, edges arriving from above move to the
// duplicate, and the two copies of the slit row are the terminals, so every
// terminal-to-terminal path is a contour encircling the hole.
AnnulusView annulus_views(const Network& net, Vec2 center, double r_inner,
                          double r_outer, SlitSide side = SlitSide::PositiveX);

// Face dual of the around view: one node per ring face plus the hole and the
// outside collapsed to one node each, inverted weights, and no dual edges
// across the slit. Exact identity: R(around) * R_dual(hole, outer) = 1 for
// the matching slit side.
Network annulus_dual(const Network& net, Vec2 center, double r_inner,
                     double r_outer, SlitSide side = SlitSide::PositiveX);

// Edge ids of `net` whose endpoints both lie within L-inf distance `radius` of
// `center` (the D-set of the gap bound), or both inside the annulus ring
// (the H-set; drop_inner_ring excludes edges lying along the inner boundary so
// D and H stay disjoint in the rerouting hypothesis).
std::vector<int> edges_within(const Network& net, Vec2 center, double radius);
std::vector<int> annulus_edges(const Network& net, Vec2 center, double r_inner,
                               double r_outer, bool drop_inner_ring);

// Keep only the listed edges (vertex set unchanged). Used for sub-network
// solves: series/parallel instances, H-restricted energies, R without D.
Network edge_subnetwork(const Network& net, const std::vector<int>& edge_ids);

// Edge-list text persistence (header with counts and format version, then one
// line per edge with 17-significant-digit decimals).
void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);

}  // namespace gffnet
