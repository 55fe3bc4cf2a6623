// walk.cpp — conductance-weighted walk simulation and rescaled-path tooling.
#include "gffnet/walk.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "gffnet/errors.hpp"
#include "gffnet/rng.hpp"

namespace gffnet {

std::vector<double> step_distribution(const Network& net, int v) {
    if (v < 0 || v >= net.vertex_count()) {
        throw ConfigError("step_distribution: vertex out of range");
    }
    const Adjacency adj = build_adjacency(net);
    std::vector<double> p(static_cast<std::size_t>(adj.degree(v)), 0.0);
    double total = 0.0;
    for (int s = adj.offsets[v]; s < adj.offsets[v + 1]; ++s) {
        const int id = adj.edge_id[static_cast<std::size_t>(s)];
        const double c = net.edges[static_cast<std::size_t>(id)].conductance();
        p[static_cast<std::size_t>(s - adj.offsets[v])] = c;
        total += c;
    }
    if (!(total > 0.0)) {
        throw ConfigError("step_distribution: vertex has no incident conductance");
    }
    for (double& w : p) w /= total;
    return p;
}

WalkContext::WalkContext(const Network& net, const std::vector<int>& domain)
    : net_(&net), adj_(build_adjacency(net)) {
    in_domain_.assign(net.coords.size(), 0);
    for (int v : domain) {
        if (v < 0 || v >= net.vertex_count()) {
            throw ConfigError("WalkContext: domain vertex out of range");
        }
        in_domain_[static_cast<std::size_t>(v)] = 1;
    }

    // Walker/Vose alias tables, one per vertex over its incidence slots.
    const std::size_t slots = adj_.neighbor.size();
    alias_prob_.assign(slots, 0.0);
    alias_other_.assign(slots, 0);
    std::vector<double> scaled;
    std::vector<int> small, large;
    for (int v = 0; v < net.vertex_count(); ++v) {
        const int off = adj_.offsets[v];
        const int deg = adj_.degree(v);
        if (deg == 0) continue;
        double total = 0.0;
        scaled.assign(static_cast<std::size_t>(deg), 0.0);
        for (int s = 0; s < deg; ++s) {
            const int id = adj_.edge_id[static_cast<std::size_t>(off + s)];
            scaled[static_cast<std::size_t>(s)] =
                net.edges[static_cast<std::size_t>(id)].conductance();
            total += scaled[static_cast<std::size_t>(s)];
        }
        if (!(total > 0.0) || !std::isfinite(total)) {
            throw ConfigError("WalkContext: vertex with non-positive total conductance");
        }
        small.clear();
        large.clear();
        for (int s = 0; s < deg; ++s) {
            scaled[static_cast<std::size_t>(s)] *= static_cast<double>(deg) / total;
            (scaled[static_cast<std::size_t>(s)] < 1.0 ? small : large).push_back(s);
        }
        while (!small.empty() && !large.empty()) {
            const int s = small.back();
            small.pop_back();
            const int l = large.back();
            alias_prob_[static_cast<std::size_t>(off + s)] = scaled[static_cast<std::size_t>(s)];
            alias_other_[static_cast<std::size_t>(off + s)] = l;
            scaled[static_cast<std::size_t>(l)] -= 1.0 - scaled[static_cast<std::size_t>(s)];
            if (scaled[static_cast<std::size_t>(l)] < 1.0) {
                large.pop_back();
                small.push_back(l);
            }
        }
        for (int s : large) {
            alias_prob_[static_cast<std::size_t>(off + s)] = 1.0;
            alias_other_[static_cast<std::size_t>(off + s)] = s;
        }
        for (int s : small) {  // only reachable through rounding
            alias_prob_[static_cast<std::size_t>(off + s)] = 1.0;
            alias_other_[static_cast<std::size_t>(off + s)] = s;
        }
    }
}

int WalkContext::sample_neighbor(int v, Rng& rng) const {
    const int off = adj_.offsets[v];
    const int deg = adj_.offsets[v + 1] - off;
    if (deg == 0) {
        throw ConfigError("sample_neighbor: isolated vertex");
    }
    const int s = static_cast<int>(rng.below(static_cast<std::uint64_t>(deg)));
    const double u = rng.uniform();
    const int slot = u < alias_prob_[static_cast<std::size_t>(off + s)]
                         ? s
                         : alias_other_[static_cast<std::size_t>(off + s)];
    return adj_.neighbor[static_cast<std::size_t>(off + slot)];
}

ExitRecord simulate_until_exit(const WalkContext& ctx, int start, Rng& rng,
                               bool keep_trace, long long step_budget) {
    if (start < 0 || start >= ctx.net().vertex_count()) {
        throw ConfigError("simulate_until_exit: start vertex out of range");
    }
    ExitRecord rec;
    int v = start;
    if (keep_trace) rec.trace.push_back(v);
    while (ctx.in_domain(v)) {
        if (rec.steps >= step_budget) {
            throw BudgetError("simulate_until_exit: step budget exhausted", rec.steps);
        }
        v = ctx.sample_neighbor(v, rng);
        ++rec.steps;
        if (keep_trace) rec.trace.push_back(v);
    }
    rec.exit_vertex = v;
    return rec;
}

StartSpec StartSpec::barycentric(int a, int b, int c, double l1, double l2, double l3) {
    return {{{a, l1}, {b, l2}, {c, l3}}};
}

int StartSpec::sample(Rng& rng) const {
    const double u = rng.uniform();
    double acc = 0.0;
    for (const auto& [v, w] : atoms) {
        acc += w;
        if (u < acc) return v;
    }
    return atoms.back().first;  // guard against accumulated rounding
}

void StartSpec::validate(const Network& net) const {
    if (atoms.empty()) throw ConfigError("StartSpec: no atoms");
    double total = 0.0;
    for (const auto& [v, w] : atoms) {
        if (v < 0 || v >= net.vertex_count()) {
            throw ConfigError("StartSpec: vertex out of range");
        }
        if (w < 0.0) throw ConfigError("StartSpec: negative weight");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ConfigError("StartSpec: weights must sum to 1");
    }
}

ExitMeasure exit_measure(const WalkContext& ctx, const StartSpec& start,
                         long long samples, std::uint64_t master_seed,
                         long long step_budget) {
    if (samples < 1) throw ConfigError("exit_measure: samples must be >= 1");
    start.validate(ctx.net());

    std::map<int, long long> counts;
    double mean = 0.0, m2 = 0.0, mean_sq = 0.0;
    for (long long r = 0; r < samples; ++r) {
        Rng rng(mix_seed(master_seed, static_cast<std::uint64_t>(r)));
        const int v0 = start.sample(rng);
        const ExitRecord rec = simulate_until_exit(ctx, v0, rng, false, step_budget);
        ++counts[rec.exit_vertex];
        const double x = static_cast<double>(rec.steps);
        // Welford update keeps the variance accumulation stable.
        const double delta = x - mean;
        mean += delta / static_cast<double>(r + 1);
        m2 += delta * (x - mean);
        mean_sq += (x * x - mean_sq) / static_cast<double>(r + 1);
    }

    ExitMeasure em;
    em.samples = samples;
    em.mean_steps = mean;
    em.sd_steps = samples > 1 ? std::sqrt(m2 / static_cast<double>(samples - 1)) : 0.0;
    em.mean_steps_se = em.sd_steps / std::sqrt(static_cast<double>(samples));
    em.mean_steps_sq = mean_sq;
    for (const auto& [v, c] : counts) {
        em.exit_vertices.push_back(v);
        em.counts.push_back(c);
        em.frequency.push_back(static_cast<double>(c) / static_cast<double>(samples));
    }
    return em;
}

double chi_factor(int n, int zeta, double gamma) {
    if (n < 0 || zeta < 1) throw ConfigError("chi_factor: invalid scale parameters");
    return std::exp2((2.0 + gamma * gamma / 2.0) * static_cast<double>(n)) *
           static_cast<double>(zeta) * static_cast<double>(zeta);
}

Vec2 RescaledPath::at(double t) const {
    if (points.empty()) throw ConfigError("RescaledPath: empty path");
    if (t <= 0.0) return points.front();
    const double s = t * chi;  // lattice-step units
    const auto last = static_cast<double>(points.size() - 1);
    if (s >= last) return points.back();
    const auto k = static_cast<std::size_t>(s);
    const double frac = s - static_cast<double>(k);
    return points[k] + frac * (points[k + 1] - points[k]);
}

RescaledPath rescaled_path(const ExitRecord& record, const Network& net, int n,
                           int zeta, double gamma) {
    if (record.trace.empty()) {
        throw ConfigError("rescaled_path: record carries no trace (keep_trace off?)");
    }
    RescaledPath path;
    path.chi = chi_factor(n, zeta, gamma);
    path.points.reserve(record.trace.size());
    for (int v : record.trace) {
        if (v < 0 || v >= net.vertex_count()) {
            throw ConfigError("rescaled_path: trace vertex out of range");
        }
        path.points.push_back(net.coords[static_cast<std::size_t>(v)]);
    }
    path.duration = static_cast<double>(path.points.size() - 1) / path.chi;
    return path;
}

double cmp_distance(const RescaledPath& p1, const RescaledPath& p2, int resolution) {
    if (resolution < 2) throw ConfigError("cmp_distance: resolution must be >= 2");
    const std::size_t m = static_cast<std::size_t>(resolution);

    // Resample both curves at `resolution` equal fractions of their durations;
    // distance modulo parameterization then reduces to discrete Frechet.
    auto resample = [m](const RescaledPath& p) {
        std::vector<Vec2> q(m);
        const double dur = std::max(p.duration, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            const double t = dur * static_cast<double>(i) / static_cast<double>(m - 1);
            q[i] = p.at(t);
        }
        return q;
    };
    const std::vector<Vec2> a = resample(p1);
    const std::vector<Vec2> b = resample(p2);

    // Discrete Frechet dynamic program, rolling rows.
    std::vector<double> prev(m, 0.0), curr(m, 0.0);
    prev[0] = dist(a[0], b[0]);
    for (std::size_t j = 1; j < m; ++j) {
        prev[j] = std::max(prev[j - 1], dist(a[0], b[j]));
    }
    for (std::size_t i = 1; i < m; ++i) {
        curr[0] = std::max(prev[0], dist(a[i], b[0]));
        for (std::size_t j = 1; j < m; ++j) {
            const double reach = std::min({prev[j], prev[j - 1], curr[j - 1]});
            curr[j] = std::max(reach, dist(a[i], b[j]));
        }
        std::swap(prev, curr);
    }
    return prev[m - 1];
}

}  // namespace gffnet
