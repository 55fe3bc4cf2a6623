// resistance.cpp — two-terminal solves on the contracted Laplacian and the
// derived network algebra (energies, path stripping, gap bound, Green kit).
#include "gffnet/resistance.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <sstream>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "gffnet/errors.hpp"
#include "gffnet/maxflow.hpp"

namespace gffnet {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

// Breadth-first reachability from `seeds` over all edges of `net`.
std::vector<char> reachable_from(const Network& net, const Adjacency& adj,
                                 const std::vector<int>& seeds) {
    std::vector<char> seen(net.coords.size(), 0);
    std::queue<int> q;
    for (int v : seeds) {
        if (!seen[static_cast<std::size_t>(v)]) {
            seen[static_cast<std::size_t>(v)] = 1;
            q.push(v);
        }
    }
    while (!q.empty()) {
        const int v = q.front();
        q.pop();
        for (int s = adj.offsets[v]; s < adj.offsets[v + 1]; ++s) {
            const int w = adj.neighbor[static_cast<std::size_t>(s)];
            if (!seen[static_cast<std::size_t>(w)]) {
                seen[static_cast<std::size_t>(w)] = 1;
                q.push(w);
            }
        }
    }
    return seen;
}

bool terminals_connected(const Network& net, const Terminals& t) {
    const Adjacency adj = build_adjacency(net);
    const std::vector<char> seen = reachable_from(net, adj, t.a);
    for (int z : t.z) {
        if (seen[static_cast<std::size_t>(z)]) return true;
    }
    return false;
}

struct LinearSolveStats {
    double residual = 0.0;
    int iterations = 0;
    bool used_direct = false;
};

// SPD solve with the policy from SolveOptions: direct LDLT below the
// threshold, otherwise diagonally preconditioned conjugate gradient.
Eigen::VectorXd solve_spd(const SpMat& L, const Eigen::VectorXd& b,
                          const SolveOptions& opts, LinearSolveStats* stats) {
    Eigen::VectorXd x;
    if (!opts.force_iterative && L.rows() < opts.direct_threshold) {
        Eigen::SimplicialLDLT<SpMat> solver;
        solver.compute(L);
        if (solver.info() != Eigen::Success) {
            throw SolveError("direct factorization of the contracted Laplacian failed");
        }
        x = solver.solve(b);
        const double bn = b.norm();
        stats->residual = bn > 0.0 ? (L * x - b).norm() / bn : 0.0;
        stats->iterations = 0;
        stats->used_direct = true;
    } else {
        Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper,
                                 Eigen::DiagonalPreconditioner<double>>
            solver;
        solver.setTolerance(opts.tol);
        solver.setMaxIterations(opts.max_iterations);
        solver.compute(L);
        x = solver.solve(b);
        stats->residual = solver.error();
        stats->iterations = static_cast<int>(solver.iterations());
        stats->used_direct = false;
        if (solver.info() != Eigen::Success) {
            std::ostringstream os;
            os << "conjugate gradient did not converge: residual " << solver.error()
               << " after " << solver.iterations() << " iterations";
            throw SolveError(os.str());
        }
    }
    if (!x.allFinite()) {
        throw SolveError("linear solve produced non-finite values (singular system?)");
    }
    return x;
}

// Dirichlet system on a vertex subset: L restricted to `domain` rows/columns,
// diagonal = full incident conductance (absorbing complement).
struct DomainSystem {
    std::vector<int> pos;    // vertex -> position in domain, or -1
    std::vector<int> verts;  // position -> vertex
    SpMat L;
};

DomainSystem build_domain_system(const Network& net, const std::vector<int>& domain) {
    DomainSystem ds;
    ds.pos.assign(net.coords.size(), -1);
    ds.verts.reserve(domain.size());
    for (int v : domain) {
        if (v < 0 || v >= net.vertex_count()) {
            throw ConfigError("domain vertex index out of range");
        }
        if (ds.pos[static_cast<std::size_t>(v)] >= 0) {
            throw ConfigError("domain contains a duplicate vertex");
        }
        ds.pos[static_cast<std::size_t>(v)] = static_cast<int>(ds.verts.size());
        ds.verts.push_back(v);
    }
    const int nd = static_cast<int>(ds.verts.size());
    if (nd == 0) throw ConfigError("domain must be nonempty");

    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(nd);
    for (const NetEdge& e : net.edges) {
        const double c = e.conductance();
        const int iu = ds.pos[static_cast<std::size_t>(e.u)];
        const int iv = ds.pos[static_cast<std::size_t>(e.v)];
        if (iu >= 0 && iv >= 0) {
            trip.emplace_back(iu, iv, -c);
            trip.emplace_back(iv, iu, -c);
            diag[iu] += c;
            diag[iv] += c;
        } else if (iu >= 0) {
            diag[iu] += c;
        } else if (iv >= 0) {
            diag[iv] += c;
        }
    }
    for (int i = 0; i < nd; ++i) trip.emplace_back(i, i, diag[i]);
    ds.L.resize(nd, nd);
    ds.L.setFromTriplets(trip.begin(), trip.end());
    return ds;
}

// pi(v) = sum of incident conductances.
std::vector<double> stationary_weights(const Network& net) {
    std::vector<double> pi(net.coords.size(), 0.0);
    for (const NetEdge& e : net.edges) {
        const double c = e.conductance();
        pi[static_cast<std::size_t>(e.u)] += c;
        pi[static_cast<std::size_t>(e.v)] += c;
    }
    return pi;
}

// Glue each group of vertices into a single fresh node, appended after the
// untouched vertices (coords from the group's first member); edges interior
// to one group are dropped. vmap sends untouched vertices to their new ids
// (-1 for glued ones); node_of[k] is the node standing for groups[k]. The
// resistance formulas for Green functions and hitting probabilities live on
// such glued networks: between-set resistances are contraction resistances.
Network glue_groups(const Network& net,
                    const std::vector<std::vector<int>>& groups,
                    std::vector<int>& vmap, std::vector<int>& node_of) {
    std::vector<int> owner(net.coords.size(), -1);
    for (std::size_t k = 0; k < groups.size(); ++k) {
        for (int v : groups[k]) owner[static_cast<std::size_t>(v)] = static_cast<int>(k);
    }
    vmap.assign(net.coords.size(), -1);
    int next = 0;
    for (int v = 0; v < net.vertex_count(); ++v) {
        if (owner[static_cast<std::size_t>(v)] < 0) vmap[static_cast<std::size_t>(v)] = next++;
    }
    node_of.resize(groups.size());
    Network glued;
    glued.coords.assign(static_cast<std::size_t>(next) + groups.size(), Vec2{});
    for (int v = 0; v < net.vertex_count(); ++v) {
        const int w = vmap[static_cast<std::size_t>(v)];
        if (w >= 0) glued.coords[static_cast<std::size_t>(w)] = net.coords[static_cast<std::size_t>(v)];
    }
    for (std::size_t k = 0; k < groups.size(); ++k) {
        node_of[k] = next + static_cast<int>(k);
        glued.coords[static_cast<std::size_t>(node_of[k])] =
            net.coords[static_cast<std::size_t>(groups[k].front())];
    }
    for (const NetEdge& e : net.edges) {
        const int ou = owner[static_cast<std::size_t>(e.u)];
        const int ov = owner[static_cast<std::size_t>(e.v)];
        NetEdge g = e;
        g.u = ou < 0 ? vmap[static_cast<std::size_t>(e.u)] : node_of[static_cast<std::size_t>(ou)];
        g.v = ov < 0 ? vmap[static_cast<std::size_t>(e.v)] : node_of[static_cast<std::size_t>(ov)];
        if (g.u == g.v) continue;  // interior to one glued group
        glued.edges.push_back(g);
    }
    glued.provenance = net.provenance + " [groups glued]";
    return glued;
}

}  // namespace

SolveResult solve_two_terminal(const Network& net, const Terminals& t,
                               const SolveOptions& opts) {
    t.validate(net);
    const int nv = net.vertex_count();
    const int ne = net.edge_count();

    std::vector<char> role(static_cast<std::size_t>(nv), 0);  // 0 free, 1 A, 2 Z
    for (int v : t.a) role[static_cast<std::size_t>(v)] = 1;
    for (int v : t.z) role[static_cast<std::size_t>(v)] = 2;

    const Adjacency adj = build_adjacency(net);
    const std::vector<char> reached = reachable_from(net, adj, t.a);
    bool z_reached = false;
    for (int z : t.z) z_reached = z_reached || reached[static_cast<std::size_t>(z)] != 0;
    if (!z_reached) {
        throw SolveError("solve_two_terminal: terminals are not connected");
    }

    std::vector<int> uidx(static_cast<std::size_t>(nv), -1);
    int nu = 0;
    for (int v = 0; v < nv; ++v) {
        if (reached[static_cast<std::size_t>(v)] && role[static_cast<std::size_t>(v)] == 0) {
            uidx[static_cast<std::size_t>(v)] = nu++;
        }
    }

    LinearSolveStats stats;
    Eigen::VectorXd x;
    if (nu > 0) {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(4 * ne));
        Eigen::VectorXd b = Eigen::VectorXd::Zero(nu);
        Eigen::VectorXd diag = Eigen::VectorXd::Zero(nu);
        for (const NetEdge& e : net.edges) {
            const double c = e.conductance();
            const int iu = uidx[static_cast<std::size_t>(e.u)];
            const int iv = uidx[static_cast<std::size_t>(e.v)];
            if (iu >= 0 && iv >= 0) {
                trip.emplace_back(iu, iv, -c);
                trip.emplace_back(iv, iu, -c);
                diag[iu] += c;
                diag[iv] += c;
            } else if (iu >= 0) {
                diag[iu] += c;
                if (role[static_cast<std::size_t>(e.v)] == 1) b[iu] += c;
            } else if (iv >= 0) {
                diag[iv] += c;
                if (role[static_cast<std::size_t>(e.u)] == 1) b[iv] += c;
            }
        }
        for (int i = 0; i < nu; ++i) trip.emplace_back(i, i, diag[i]);
        SpMat L(nu, nu);
        L.setFromTriplets(trip.begin(), trip.end());
        x = solve_spd(L, b, opts, &stats);
    } else {
        stats.used_direct = true;
    }

    SolveResult res;
    res.terminals = t;
    res.residual = stats.residual;
    res.iterations = stats.iterations;
    res.used_direct = stats.used_direct;

    res.potential.assign(static_cast<std::size_t>(nv), 0.0);
    for (int v = 0; v < nv; ++v) {
        if (role[static_cast<std::size_t>(v)] == 1) {
            res.potential[static_cast<std::size_t>(v)] = 1.0;
        } else if (uidx[static_cast<std::size_t>(v)] >= 0) {
            res.potential[static_cast<std::size_t>(v)] = x[uidx[static_cast<std::size_t>(v)]];
        }
    }

    res.current.assign(static_cast<std::size_t>(ne), 0.0);
    double out_of_a = 0.0, into_z = 0.0;
    for (int id = 0; id < ne; ++id) {
        const NetEdge& e = net.edges[static_cast<std::size_t>(id)];
        const double theta = e.conductance() * (res.potential[static_cast<std::size_t>(e.u)] -
                                                res.potential[static_cast<std::size_t>(e.v)]);
        res.current[static_cast<std::size_t>(id)] = theta;
        const char ru = role[static_cast<std::size_t>(e.u)];
        const char rv = role[static_cast<std::size_t>(e.v)];
        if (ru == 1 && rv != 1) out_of_a += theta;
        if (rv == 1 && ru != 1) out_of_a -= theta;
        if (rv == 2 && ru != 2) into_z += theta;
        if (ru == 2 && rv != 2) into_z -= theta;
    }
    if (!(out_of_a > 0.0) || !std::isfinite(out_of_a)) {
        throw SolveError("solve_two_terminal: no current flows between the terminals");
    }
    res.strength_mismatch = std::abs(out_of_a - into_z) / out_of_a;

    const double scale = 1.0 / out_of_a;
    double energy = 0.0;
    for (int id = 0; id < ne; ++id) {
        res.current[static_cast<std::size_t>(id)] *= scale;
        const double theta = res.current[static_cast<std::size_t>(id)];
        energy += theta * theta * net.edges[static_cast<std::size_t>(id)].resistance();
    }
    res.resistance = scale;
    res.conductance = out_of_a;
    res.energy = energy;

    std::vector<double> div(static_cast<std::size_t>(nv), 0.0);
    for (int id = 0; id < ne; ++id) {
        const NetEdge& e = net.edges[static_cast<std::size_t>(id)];
        div[static_cast<std::size_t>(e.u)] += res.current[static_cast<std::size_t>(id)];
        div[static_cast<std::size_t>(e.v)] -= res.current[static_cast<std::size_t>(id)];
    }
    res.max_divergence = 0.0;
    for (int v = 0; v < nv; ++v) {
        if (role[static_cast<std::size_t>(v)] == 0) {
            res.max_divergence = std::max(res.max_divergence,
                                          std::abs(div[static_cast<std::size_t>(v)]));
        }
    }
    return res;
}

double effective_resistance(const Network& net, const Terminals& t,
                            const SolveOptions& opts) {
    return solve_two_terminal(net, t, opts).resistance;
}

double effective_resistance(const Network& net, int a, int z, const SolveOptions& opts) {
    Terminals t;
    t.a = {a};
    t.z = {z};
    return solve_two_terminal(net, t, opts).resistance;
}

double dirichlet_energy(const Network& net, const std::vector<double>& current,
                        const std::vector<int>& edge_ids) {
    if (static_cast<int>(current.size()) != net.edge_count()) {
        throw ConfigError("dirichlet_energy: current size must match edge count");
    }
    double energy = 0.0;
    for (int id : edge_ids) {
        if (id < 0 || id >= net.edge_count()) {
            throw ConfigError("dirichlet_energy: edge id out of range");
        }
        const double theta = current[static_cast<std::size_t>(id)];
        energy += theta * theta * net.edges[static_cast<std::size_t>(id)].resistance();
    }
    return energy;
}

double dirichlet_energy(const Network& net, const std::vector<double>& current) {
    if (static_cast<int>(current.size()) != net.edge_count()) {
        throw ConfigError("dirichlet_energy: current size must match edge count");
    }
    double energy = 0.0;
    for (int id = 0; id < net.edge_count(); ++id) {
        const double theta = current[static_cast<std::size_t>(id)];
        energy += theta * theta * net.edges[static_cast<std::size_t>(id)].resistance();
    }
    return energy;
}

WeightedPathSet path_decomposition(const Network& net, const SolveResult& result,
                                   double strength_tol) {
    const int nv = net.vertex_count();
    const int ne = net.edge_count();
    if (static_cast<int>(result.current.size()) != ne) {
        throw ConfigError("path_decomposition: result does not match the network");
    }
    std::vector<char> role(static_cast<std::size_t>(nv), 0);
    for (int v : result.terminals.a) role[static_cast<std::size_t>(v)] = 1;
    for (int v : result.terminals.z) role[static_cast<std::size_t>(v)] = 2;

    const Adjacency adj = build_adjacency(net);
    std::vector<double> rho = result.current;  // residual flow, signed u -> v

    // Signed outflow of `v` along incidence slot s (positive = leaves v).
    auto slot_outflow = [&](int v, int s) {
        const int id = adj.edge_id[static_cast<std::size_t>(s)];
        const NetEdge& e = net.edges[static_cast<std::size_t>(id)];
        return v == e.u ? rho[static_cast<std::size_t>(id)]
                        : -rho[static_cast<std::size_t>(id)];
    };

    auto remaining_strength = [&]() {
        double s = 0.0;
        for (int v = 0; v < nv; ++v) {
            if (role[static_cast<std::size_t>(v)] != 1) continue;
            for (int slot = adj.offsets[v]; slot < adj.offsets[v + 1]; ++slot) {
                const int w = adj.neighbor[static_cast<std::size_t>(slot)];
                if (role[static_cast<std::size_t>(w)] == 1) continue;
                const double f = slot_outflow(v, slot);
                if (f > 0.0) s += f;
            }
        }
        return s;
    };

    constexpr double kFloor = 1e-15;
    WeightedPathSet out;
    std::vector<char> visited(static_cast<std::size_t>(nv), 0);
    double rem = remaining_strength();
    bool stuck = false;

    while (!stuck && rem > kFloor && static_cast<int>(out.paths.size()) <= ne) {
        // Start arc: largest positive outflow from the A group; ties resolved
        // by vertex index, then neighbor index, then edge id (determinism).
        int cur = -1;
        double best = 0.0;
        for (int v = 0; v < nv; ++v) {
            if (role[static_cast<std::size_t>(v)] != 1) continue;
            for (int slot = adj.offsets[v]; slot < adj.offsets[v + 1]; ++slot) {
                if (role[static_cast<std::size_t>(
                        adj.neighbor[static_cast<std::size_t>(slot)])] == 1) {
                    continue;
                }
                const double f = slot_outflow(v, slot);
                if (f > best) {
                    best = f;
                    cur = v;
                }
            }
        }
        if (cur < 0) {
            stuck = true;
            break;
        }

        WeightedPathSet::Path path;
        path.vertices.push_back(cur);
        std::fill(visited.begin(), visited.end(), 0);
        visited[static_cast<std::size_t>(cur)] = 1;
        double alpha = std::numeric_limits<double>::infinity();
        bool reached_sink = false;
        while (true) {
            int best_slot = -1;
            double best_flow = 0.0;
            int best_to = -1;
            for (int slot = adj.offsets[cur]; slot < adj.offsets[cur + 1]; ++slot) {
                const double f = slot_outflow(cur, slot);
                if (f <= 0.0) continue;
                const int w = adj.neighbor[static_cast<std::size_t>(slot)];
                if (f > best_flow || (f == best_flow && best_to >= 0 && w < best_to)) {
                    best_flow = f;
                    best_slot = slot;
                    best_to = w;
                }
            }
            if (best_slot < 0) break;  // dead end
            const int id = adj.edge_id[static_cast<std::size_t>(best_slot)];
            const int to = adj.neighbor[static_cast<std::size_t>(best_slot)];
            if (visited[static_cast<std::size_t>(to)]) break;  // numerical cycle
            visited[static_cast<std::size_t>(to)] = 1;
            path.vertices.push_back(to);
            path.edge_ids.push_back(id);
            alpha = std::min(alpha, best_flow);
            cur = to;
            if (role[static_cast<std::size_t>(cur)] == 2) {
                reached_sink = true;
                break;
            }
        }

        if (!reached_sink || path.edge_ids.empty() || !(alpha > 0.0)) {
            stuck = true;
            break;
        }

        path.weight = alpha;
        path.split_r.reserve(path.edge_ids.size());
        for (std::size_t s = 0; s < path.edge_ids.size(); ++s) {
            const int id = path.edge_ids[s];
            const NetEdge& e = net.edges[static_cast<std::size_t>(id)];
            const double theta0 = std::abs(result.current[static_cast<std::size_t>(id)]);
            path.split_r.push_back(e.resistance() * theta0 / alpha);
            // Subtract along the traversal direction.
            const int from = path.vertices[s];
            rho[static_cast<std::size_t>(id)] += from == e.u ? -alpha : alpha;
        }
        out.paths.push_back(std::move(path));
        rem = remaining_strength();
    }

    out.residual_strength = rem;
    if (rem > strength_tol) {
        std::ostringstream os;
        os << "path_decomposition: residual flow " << rem
           << " above tolerance (cyclic residual flow?)";
        throw DecompositionError(os.str());
    }
    return out;
}

double current_through_set(const Network& net, const SolveResult& result,
                           const std::vector<int>& d_edges) {
    if (static_cast<int>(result.current.size()) != net.edge_count()) {
        throw ConfigError("current_through_set: result does not match the network");
    }
    std::vector<double> caps(result.current.size());
    for (std::size_t i = 0; i < caps.size(); ++i) caps[i] = std::abs(result.current[i]);
    for (int id : d_edges) {
        if (id < 0 || id >= net.edge_count()) {
            throw ConfigError("current_through_set: edge id out of range");
        }
        caps[static_cast<std::size_t>(id)] = 0.0;
    }
    const MaxFlowResult mf = max_flow(net, result.terminals, caps);
    return std::clamp(1.0 - mf.value, 0.0, 1.0);
}

ResdifReport resdif_gap(const Network& net, const Terminals& t,
                        const std::vector<int>& d_edges,
                        const std::vector<int>& h_edges, const Network& contours,
                        const SolveOptions& opts) {
    std::vector<char> in_d(static_cast<std::size_t>(net.edge_count()), 0);
    for (int id : d_edges) {
        if (id < 0 || id >= net.edge_count()) {
            throw ConfigError("resdif_gap: edge id out of range");
        }
        in_d[static_cast<std::size_t>(id)] = 1;
    }
    for (int id : h_edges) {
        if (id < 0 || id >= net.edge_count()) {
            throw ConfigError("resdif_gap: edge id out of range");
        }
        if (in_d[static_cast<std::size_t>(id)]) {
            throw ConfigError("resdif_gap: D and H must be disjoint");
        }
    }

    ResdifReport rep;
    const SolveResult base = solve_two_terminal(net, t, opts);
    rep.r_base = base.resistance;

    std::vector<int> keep;
    keep.reserve(static_cast<std::size_t>(net.edge_count()) - d_edges.size());
    for (int id = 0; id < net.edge_count(); ++id) {
        if (!in_d[static_cast<std::size_t>(id)]) keep.push_back(id);
    }
    const Network without_d = edge_subnetwork(net, keep);
    if (!terminals_connected(without_d, t)) {
        rep.disconnected = true;
        rep.r_without_d = kInfiniteResistance;
        rep.lhs = kInfiniteResistance;
    } else {
        rep.r_without_d = effective_resistance(without_d, t, opts);
        rep.lhs = rep.r_without_d - rep.r_base;
    }

    rep.energy_h = dirichlet_energy(net, base.current, h_edges);
    rep.energy_d = dirichlet_energy(net, base.current, d_edges);
    rep.theta_d = current_through_set(net, base, d_edges);
    rep.r_contours = effective_resistance(contours, supernode_terminals(contours), opts);
    rep.rhs = rep.energy_h + 2.0 * rep.theta_d * rep.theta_d * rep.r_contours - rep.energy_d;
    return rep;
}

double green_function(const Network& net, const std::vector<int>& domain, int x,
                      int y, const SolveOptions& opts) {
    std::vector<char> in_domain(net.coords.size(), 0);
    for (int v : domain) {
        if (v < 0 || v >= net.vertex_count()) {
            throw ConfigError("green_function: domain vertex out of range");
        }
        in_domain[static_cast<std::size_t>(v)] = 1;
    }
    if (x < 0 || x >= net.vertex_count() || y < 0 || y >= net.vertex_count()) {
        throw ConfigError("green_function: vertex out of range");
    }
    if (!in_domain[static_cast<std::size_t>(x)] || !in_domain[static_cast<std::size_t>(y)]) {
        return 0.0;  // convention: zero off the domain
    }
    std::vector<int> complement;
    for (int v = 0; v < net.vertex_count(); ++v) {
        if (!in_domain[static_cast<std::size_t>(v)]) complement.push_back(v);
    }
    if (complement.empty()) {
        throw ConfigError("green_function: the domain complement must be nonempty");
    }

    const std::vector<double> pi = stationary_weights(net);

    // All three resistances live in the network with the whole complement
    // glued into one vertex z*: gluing leaves R(x, Z) and R(y, Z) unchanged,
    // but the plain R(x, y) would overstate the x-y term whenever current can
    // shortcut through Z.
    std::vector<int> remap, node_of;
    const Network glued = glue_groups(net, {complement}, remap, node_of);
    const int z_star = node_of[0];

    const int gx = remap[static_cast<std::size_t>(x)];
    const int gy = remap[static_cast<std::size_t>(y)];
    const double r_xz = effective_resistance(glued, gx, z_star, opts);
    const double r_yz =
        y == x ? r_xz : effective_resistance(glued, gy, z_star, opts);
    const double r_xy = y == x ? 0.0 : effective_resistance(glued, gx, gy, opts);
    return 0.5 * pi[static_cast<std::size_t>(y)] * (r_xz + r_yz - r_xy);
}

std::vector<double> green_row(const Network& net, const std::vector<int>& domain,
                              int x, const SolveOptions& opts) {
    std::vector<double> row(net.coords.size(), 0.0);
    const DomainSystem ds = build_domain_system(net, domain);
    if (x < 0 || x >= net.vertex_count()) {
        throw ConfigError("green_row: vertex out of range");
    }
    const int px = ds.pos[static_cast<std::size_t>(x)];
    if (px < 0) return row;  // x outside the domain: all zeros

    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ds.L.rows());
    rhs[px] = 1.0;
    LinearSolveStats stats;
    const Eigen::VectorXd g = solve_spd(ds.L, rhs, opts, &stats);

    const std::vector<double> pi = stationary_weights(net);
    for (std::size_t p = 0; p < ds.verts.size(); ++p) {
        const int v = ds.verts[p];
        row[static_cast<std::size_t>(v)] =
            g[static_cast<Eigen::Index>(p)] * pi[static_cast<std::size_t>(v)];
    }
    return row;
}

double hitting_probability(const Network& net, int v, const std::vector<int>& a,
                           const std::vector<int>& z, const SolveOptions& opts) {
    if (v < 0 || v >= net.vertex_count()) {
        throw ConfigError("hitting_probability: vertex out of range");
    }
    for (int w : a) {
        if (w == v) throw ConfigError("hitting_probability: v must not lie in A");
    }
    for (int w : z) {
        if (w == v) throw ConfigError("hitting_probability: v must not lie in Z");
    }
    Terminals taz{a, z};
    taz.validate(net);

    // The resistance formula holds on the network where A and Z are single
    // vertices, so glue both sets first; each pairwise solve must see the
    // other set contracted (plain R(v, A) would ignore shortcuts through Z).
    std::vector<int> vmap, node_of;
    const Network glued = glue_groups(net, {a, z}, vmap, node_of);
    const int alpha = node_of[0], zeta = node_of[1];
    const int gv = vmap[static_cast<std::size_t>(v)];

    const double r_az = effective_resistance(glued, alpha, zeta, opts);
    const double r_vz = effective_resistance(glued, gv, zeta, opts);
    const double r_va = effective_resistance(glued, gv, alpha, opts);
    return (r_vz + r_az - r_va) / (2.0 * r_az);
}

std::vector<double> exit_expectation_all(const Network& net,
                                         const std::vector<int>& domain,
                                         const SolveOptions& opts) {
    const DomainSystem ds = build_domain_system(net, domain);
    const std::vector<double> pi = stationary_weights(net);
    Eigen::VectorXd rhs(ds.L.rows());
    for (std::size_t p = 0; p < ds.verts.size(); ++p) {
        rhs[static_cast<Eigen::Index>(p)] = pi[static_cast<std::size_t>(ds.verts[p])];
    }
    LinearSolveStats stats;
    const Eigen::VectorXd h = solve_spd(ds.L, rhs, opts, &stats);
    return std::vector<double>(h.data(), h.data() + h.size());
}

double exact_exit_expectation(const Network& net, const std::vector<int>& domain,
                              int start, const SolveOptions& opts) {
    if (start < 0 || start >= net.vertex_count()) {
        throw ConfigError("exact_exit_expectation: vertex out of range");
    }
    int pos = -1;
    for (std::size_t i = 0; i < domain.size(); ++i) {
        if (domain[i] == start) {
            pos = static_cast<int>(i);
            break;
        }
    }
    if (pos < 0) return 0.0;  // starting outside the domain: already exited
    const std::vector<double> all = exit_expectation_all(net, domain, opts);
    return all[static_cast<std::size_t>(pos)];
}

std::vector<std::pair<int, double>> harmonic_exit_measure(
    const Network& net, const std::vector<int>& domain, int start,
    const SolveOptions& opts) {
    if (start < 0 || start >= net.vertex_count()) {
        throw ConfigError("harmonic_exit_measure: vertex out of range");
    }
    const DomainSystem ds = build_domain_system(net, domain);
    const int ps = ds.pos[static_cast<std::size_t>(start)];
    if (ps < 0) return {{start, 1.0}};  // already outside: exits where it stands

    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ds.L.rows());
    rhs[ps] = 1.0;
    LinearSolveStats stats;
    const Eigen::VectorXd g = solve_spd(ds.L, rhs, opts, &stats);

    std::map<int, double> prob;
    for (const NetEdge& e : net.edges) {
        const double c = e.conductance();
        const int pu = ds.pos[static_cast<std::size_t>(e.u)];
        const int pv = ds.pos[static_cast<std::size_t>(e.v)];
        if (pu >= 0 && pv < 0) prob[e.v] += g[pu] * c;
        if (pv >= 0 && pu < 0) prob[e.u] += g[pv] * c;
    }
    return std::vector<std::pair<int, double>>(prob.begin(), prob.end());
}

}  // namespace gffnet
