// maxflow.cpp — Dinic blocking-flow max-flow for undirected capacitated networks.
//
// Terminal groups are handled with a super source/sink joined by infinite-
// capacity arcs; an undirected edge of capacity c becomes a residual arc pair
// with capacity c in both directions, so the net edge flow is
// (cap_vu - cap_uv) / 2 once the algorithm terminates.
#include "gffnet/maxflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "gffnet/errors.hpp"

namespace gffnet {

namespace {

struct Arc {
    int to = 0;
    int rev = 0;       // index of the reverse arc in graph[to]
    double cap = 0.0;
    int edge_id = -1;  // original edge, -1 for super-terminal arcs
};

class Dinic {
  public:
    explicit Dinic(int n) : graph_(static_cast<std::size_t>(n)), level_(n), iter_(n) {}

    void add_undirected(int u, int v, double cap, int edge_id) {
        graph_[static_cast<std::size_t>(u)].push_back(
            {v, static_cast<int>(graph_[static_cast<std::size_t>(v)].size()), cap, edge_id});
        graph_[static_cast<std::size_t>(v)].push_back(
            {u, static_cast<int>(graph_[static_cast<std::size_t>(u)].size()) - 1, cap, edge_id});
    }

    void add_directed(int u, int v, double cap) {
        graph_[static_cast<std::size_t>(u)].push_back(
            {v, static_cast<int>(graph_[static_cast<std::size_t>(v)].size()), cap, -1});
        graph_[static_cast<std::size_t>(v)].push_back(
            {u, static_cast<int>(graph_[static_cast<std::size_t>(u)].size()) - 1, 0.0, -1});
    }

    double run(int s, int t, double cutoff) {
        double total = 0.0;
        while (bfs(s, t, cutoff)) {
            std::fill(iter_.begin(), iter_.end(), 0);
            while (true) {
                const double pushed =
                    dfs(s, t, std::numeric_limits<double>::infinity(), cutoff);
                if (pushed <= 0.0) break;
                total += pushed;
            }
        }
        return total;
    }

    // Residual reachability from s with the same cutoff used for augmentation.
    std::vector<char> reachable(int s, double cutoff) const {
        std::vector<char> seen(graph_.size(), 0);
        std::queue<int> q;
        seen[static_cast<std::size_t>(s)] = 1;
        q.push(s);
        while (!q.empty()) {
            const int v = q.front();
            q.pop();
            for (const Arc& a : graph_[static_cast<std::size_t>(v)]) {
                if (a.cap > cutoff && !seen[static_cast<std::size_t>(a.to)]) {
                    seen[static_cast<std::size_t>(a.to)] = 1;
                    q.push(a.to);
                }
            }
        }
        return seen;
    }

    const std::vector<std::vector<Arc>>& graph() const { return graph_; }

  private:
    bool bfs(int s, int t, double cutoff) {
        std::fill(level_.begin(), level_.end(), -1);
        std::queue<int> q;
        level_[static_cast<std::size_t>(s)] = 0;
        q.push(s);
        while (!q.empty()) {
            const int v = q.front();
            q.pop();
            for (const Arc& a : graph_[static_cast<std::size_t>(v)]) {
                if (a.cap > cutoff && level_[static_cast<std::size_t>(a.to)] < 0) {
                    level_[static_cast<std::size_t>(a.to)] =
                        level_[static_cast<std::size_t>(v)] + 1;
                    q.push(a.to);
                }
            }
        }
        return level_[static_cast<std::size_t>(t)] >= 0;
    }

    double dfs(int v, int t, double limit, double cutoff) {
        if (v == t) return limit;
        for (int& i = iter_[static_cast<std::size_t>(v)];
             i < static_cast<int>(graph_[static_cast<std::size_t>(v)].size()); ++i) {
            Arc& a = graph_[static_cast<std::size_t>(v)][static_cast<std::size_t>(i)];
            if (a.cap <= cutoff ||
                level_[static_cast<std::size_t>(a.to)] !=
                    level_[static_cast<std::size_t>(v)] + 1) {
                continue;
            }
            const double pushed = dfs(a.to, t, std::min(limit, a.cap), cutoff);
            if (pushed > 0.0) {
                a.cap -= pushed;
                graph_[static_cast<std::size_t>(a.to)][static_cast<std::size_t>(a.rev)].cap +=
                    pushed;
                return pushed;
            }
        }
        return 0.0;
    }

    std::vector<std::vector<Arc>> graph_;
    std::vector<int> level_;
    std::vector<int> iter_;
};

}  // namespace

MaxFlowResult max_flow(const Network& net, const Terminals& t,
                       const std::vector<double>& capacities) {
    t.validate(net);
    if (static_cast<int>(capacities.size()) != net.edge_count()) {
        throw ConfigError("max_flow: capacity count must match edge count");
    }
    double cap_max = 0.0;
    for (double c : capacities) {
        if (!(c >= 0.0)) throw ConfigError("max_flow: capacities must be >= 0");
        cap_max = std::max(cap_max, c);
    }
    const double cutoff = 1e-12 * cap_max;

    const int nv = net.vertex_count();
    const int source = nv, sink = nv + 1;
    Dinic dinic(nv + 2);
    for (int id = 0; id < net.edge_count(); ++id) {
        const NetEdge& e = net.edges[static_cast<std::size_t>(id)];
        dinic.add_undirected(e.u, e.v, capacities[static_cast<std::size_t>(id)], id);
    }
    const double inf = std::numeric_limits<double>::infinity();
    for (int v : t.a) dinic.add_directed(source, v, inf);
    for (int v : t.z) dinic.add_directed(v, sink, inf);

    MaxFlowResult result;
    result.value = dinic.run(source, sink, cutoff);
    result.source_side = dinic.reachable(source, cutoff);
    result.source_side.resize(static_cast<std::size_t>(nv));  // drop super nodes

    // Net flow per original edge: the u->v arc started with capacity c, so the
    // residual deficit c - cap(u->v) is exactly the net flow u -> v.
    result.flow.assign(static_cast<std::size_t>(net.edge_count()), 0.0);
    for (int v = 0; v < nv; ++v) {
        for (const Arc& a : dinic.graph()[static_cast<std::size_t>(v)]) {
            if (a.edge_id < 0) continue;
            const NetEdge& e = net.edges[static_cast<std::size_t>(a.edge_id)];
            if (v == e.u && a.to == e.v) {
                const double c0 = capacities[static_cast<std::size_t>(a.edge_id)];
                result.flow[static_cast<std::size_t>(a.edge_id)] = c0 - a.cap;
            }
        }
    }

    // Minimum cut: original edges from the source side to the sink side.
    result.cut_capacity = 0.0;
    for (int id = 0; id < net.edge_count(); ++id) {
        const NetEdge& e = net.edges[static_cast<std::size_t>(id)];
        const bool su = result.source_side[static_cast<std::size_t>(e.u)] != 0;
        const bool sv = result.source_side[static_cast<std::size_t>(e.v)] != 0;
        if (su != sv) {
            result.cut_edges.push_back(id);
            result.cut_capacity += capacities[static_cast<std::size_t>(id)];
        }
    }
    return result;
}

}  // namespace gffnet
