// resistance.hpp — two-terminal solves and the electric-network algebra:
// energies, path decompositions, current through edge sets, the resistance-
// difference gap bound, Green's functions and hitting probabilities.
#pragma once

#include <limits>
#include <vector>

#include "gffnet/network.hpp"

namespace gffnet {

struct SolveOptions {
    double tol = 1e-10;           // relative residual target (iterative path)
    int max_iterations = 50000;
    int direct_threshold = 5000;  // direct factorization below this many unknowns
    bool force_iterative = false;
};

struct SolveResult {
    std::vector<double> potential;  // f: 1 on A, 0 on Z
    std::vector<double> current;    // theta, unit strength A -> Z, signed u -> v
    double resistance = 0.0;        // R = (f_A - f_Z) / strength
    double conductance = 0.0;       // C = 1/R
    double energy = 0.0;            // E(theta) = sum r_e theta_e^2 (unit frame)
    double residual = 0.0;          // relative solver residual
    int iterations = 0;
    bool used_direct = false;
    double max_divergence = 0.0;    // max |div theta| over non-terminals
    double strength_mismatch = 0.0; // |out of A - into Z| for the raw solve
    Terminals terminals;            // kept for decomposition & diagnostics
};

// Potential solve on the supernode-contracted Laplacian (CG with diagonal
// preconditioner; direct LDLT below direct_threshold unknowns).
SolveResult solve_two_terminal(const Network& net, const Terminals& t,
                               const SolveOptions& opts = {});

double effective_resistance(const Network& net, const Terminals& t,
                            const SolveOptions& opts = {});
double effective_resistance(const Network& net, int a, int z,
                            const SolveOptions& opts = {});

// E(theta, subset) = sum_{e in subset} theta(e)^2 r_e.
double dirichlet_energy(const Network& net, const std::vector<double>& current,
                        const std::vector<int>& edge_ids);
double dirichlet_energy(const Network& net, const std::vector<double>& current);

struct WeightedPathSet {
    struct Path {
        std::vector<int> vertices;       // source ... sink
        std::vector<int> edge_ids;
        double weight = 0.0;             // alpha_k
        std::vector<double> split_r;     // r_{e,P_k} = r_e |theta(e)| / alpha_k
    };
    std::vector<Path> paths;
    double residual_strength = 0.0;      // leftover flow when stripping stopped
};

// Iterative path stripping of the unit current flow (largest residual outgoing
// flow first, lexicographic tie-break). Terminates in <= |E| rounds.
WeightedPathSet path_decomposition(const Network& net, const SolveResult& result,
                                   double strength_tol = 1e-9);

// theta(D) = 1 - (max flow from A to Z with capacities |theta| and 0 on D),
// clamped to [0,1].
double current_through_set(const Network& net, const SolveResult& result,
                           const std::vector<int>& d_edges);

struct ResdifReport {
    double lhs = 0.0;           // R without D  -  R   (+inf when disconnected)
    double rhs = 0.0;           // E(theta,H) + 2 theta(D)^2 R(contours) - E(theta,D)
    bool disconnected = false;  // removing D disconnected the terminals
    double r_base = 0.0;
    double r_without_d = 0.0;
    double energy_h = 0.0;
    double energy_d = 0.0;
    double theta_d = 0.0;
    double r_contours = 0.0;
};

// Gap bound for deleting an edge set D: lhs = R^{\D} - R, rhs as above, so
// callers can assert lhs <= rhs + tol (rerouting the D-current through H).
// `contours` is the around-view network of the annulus H (its two-terminal
// resistance is the contour-family resistance).
ResdifReport resdif_gap(const Network& net, const Terminals& t,
                        const std::vector<int>& d_edges,
                        const std::vector<int>& h_edges, const Network& contours,
                        const SolveOptions& opts = {});

// G_V(x,y) = pi(y)(R(x,Z) + R(y,Z) - R_Z(x,y))/2 with Z = complement of V and
// R_Z the resistance in the network with Z glued to one vertex (Tetali's
// form); zero when x or y is outside V. pi(y) = sum of conductances at y.
double green_function(const Network& net, const std::vector<int>& domain, int x,
                      int y, const SolveOptions& opts = {});

// Whole Green row G(x, .) by one Dirichlet solve: G(x,y) = [(D-A)^{-1}]_{xy}
// pi(y). Cross-validates the resistance-formula route.
std::vector<double> green_row(const Network& net, const std::vector<int>& domain,
                              int x, const SolveOptions& opts = {});

// P^v(tau_A < tau_Z) = (R(v,Z) + R(A,Z) - R(v,A)) / (2 R(A,Z)), all three
// resistances taken in the network with A and Z each glued to one vertex.
double hitting_probability(const Network& net, int v, const std::vector<int>& a,
                           const std::vector<int>& z,
                           const SolveOptions& opts = {});

// E^start[exit steps from domain] via one solve of (I - P) h = 1, i.e. the
// weighted Laplacian system L h = pi restricted to the domain.
double exact_exit_expectation(const Network& net, const std::vector<int>& domain,
                              int start, const SolveOptions& opts = {});
// Same solve, whole vector over the domain (indexed as domain[i] -> h[i]).
std::vector<double> exit_expectation_all(const Network& net,
                                         const std::vector<int>& domain,
                                         const SolveOptions& opts = {});

// Harmonic measure: P^start(exit vertex = z) for every z adjacent to the
// domain, by one absorbing solve per exit vertex is wasteful; this solves the
// adjoint system once and returns pairs (exit vertex, probability).
std::vector<std::pair<int, double>> harmonic_exit_measure(
    const Network& net, const std::vector<int>& domain, int start,
    const SolveOptions& opts = {});

inline constexpr double kInfiniteResistance =
    std::numeric_limits<double>::infinity();

}  // namespace gffnet
