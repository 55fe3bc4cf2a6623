// maxflow.hpp — max-flow / min-cut on undirected networks with real capacities.
#pragma once

#include <vector>

#include "gffnet/network.hpp"

namespace gffnet {

struct MaxFlowResult {
    double value = 0.0;               // max flow = min cut capacity
    std::vector<double> flow;         // net flow per edge, signed u -> v
    std::vector<int> cut_edges;       // a minimum cut (edge ids)
    std::vector<char> source_side;    // per vertex: reachable in the residual
    double cut_capacity = 0.0;        // capacity of cut_edges (equals value)
};

// Dinic-style blocking flow; augmentation cutoff 1e-12 * max capacity.
// Capacities are per edge of `net` (same indexing), >= 0.
MaxFlowResult max_flow(const Network& net, const Terminals& t,
                       const std::vector<double>& capacities);

}  // namespace gffnet
