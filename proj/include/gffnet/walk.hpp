// walk.hpp — the conductance-weighted random walk: simulation to the exit
// time, exit measures, chi_n-rescaled paths, and curve distance modulo time
// parameterization.
#pragma once

#include <cstdint>
#include <vector>

#include "gffnet/network.hpp"

namespace gffnet {

// Step distribution at v: neighbor w with probability c(v,w) / sum_u c(v,u).
std::vector<double> step_distribution(const Network& net, int v);

// Immutable per-network sampling context: adjacency plus Walker alias tables
// for O(1) neighbor draws. Safe to share across replica threads.
class WalkContext {
  public:
    WalkContext(const Network& net, const std::vector<int>& domain);

    const Network& net() const { return *net_; }
    bool in_domain(int v) const { return in_domain_[static_cast<std::size_t>(v)] != 0; }
    int sample_neighbor(int v, class Rng& rng) const;

  private:
    const Network* net_;
    Adjacency adj_;
    std::vector<char> in_domain_;
    std::vector<double> alias_prob_;  // per incident-edge slot
    std::vector<int> alias_other_;
};

struct ExitRecord {
    int exit_vertex = -1;
    long long steps = 0;
    std::vector<int> trace;  // start..exit inclusive when requested
};

inline constexpr long long kDefaultStepBudget = 1'000'000'000LL;

// Walk from start until the first vertex outside the domain; deterministic
// given the stream. Starting outside the domain exits immediately (0 steps).
ExitRecord simulate_until_exit(const WalkContext& ctx, int start, Rng& rng,
                               bool keep_trace = false,
                               long long step_budget = kDefaultStepBudget);

// Start specification: a vertex, or a barycentric mixture over a lattice
// triangle's corners (each replica samples one corner by the weights).
struct StartSpec {
    std::vector<std::pair<int, double>> atoms;  // (vertex, weight), sums to 1

    static StartSpec vertex(int v) { return {{{v, 1.0}}}; }
    static StartSpec barycentric(int a, int b, int c, double l1, double l2,
                                 double l3);
    int sample(Rng& rng) const;
    void validate(const Network& net) const;
};

struct ExitMeasure {
    std::vector<int> exit_vertices;   // sorted by vertex id
    std::vector<long long> counts;
    std::vector<double> frequency;
    long long samples = 0;
    double mean_steps = 0.0;
    double sd_steps = 0.0;            // sample standard deviation
    double mean_steps_se = 0.0;       // sd / sqrt(samples)
    double mean_steps_sq = 0.0;       // empirical E[steps^2]
};

// Replica r uses the stream mix_seed(master_seed, r); aggregation is over
// sorted vertex ids so the result is independent of execution order.
ExitMeasure exit_measure(const WalkContext& ctx, const StartSpec& start,
                         long long samples, std::uint64_t master_seed,
                         long long step_budget = kDefaultStepBudget);

struct RescaledPath {
    std::vector<Vec2> points;  // trace coordinates, one per lattice step
    double chi = 0.0;          // chi_n = 2^{(2+gamma^2/2)n} zeta^2
    double duration = 0.0;     // (points-1)/chi

    // Piecewise-linear position at rescaled time t, extended constantly
    // beyond the exit time.
    Vec2 at(double t) const;
};

double chi_factor(int n, int zeta, double gamma);
RescaledPath rescaled_path(const ExitRecord& record, const Network& net, int n,
                           int zeta, double gamma);

// Distance modulo time parameterization: both curves resampled at `resolution`
// equal parameter values, then discrete Frechet dynamic program. Symmetric;
// an upper bound that tightens as resolution grows.
double cmp_distance(const RescaledPath& p1, const RescaledPath& p2,
                    int resolution = 512);

}  // namespace gffnet
