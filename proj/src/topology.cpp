#include "rplmesh/topology.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "rplmesh/rng.hpp"

namespace rplmesh {

double DirectionalLink::prr_at(std::int64_t time_ms) const {
    if (prr_series.empty()) return 0.0;
    if (time_ms <= prr_series.front().time_ms) return prr_series.front().prr;
    // Last sample with time <= query time.
    auto it = std::upper_bound(prr_series.begin(), prr_series.end(), time_ms,
                               [](std::int64_t t, const PrrSample& s) { return t < s.time_ms; });
    return std::prev(it)->prr;
}

Topology::Topology(std::size_t node_count, NodeId root)
    : node_count_(node_count), root_(root) {
    if (node_count > 0xFFFF)
        throw std::invalid_argument("node_count exceeds the 16-bit id space");
    if (root >= node_count)
        throw std::invalid_argument("root id out of range");
}

const DirectionalLink* Topology::link(NodeId src, NodeId dst) const {
    auto it = links_.find({src, dst});
    return it == links_.end() ? nullptr : &it->second;
}

DirectionalLink& Topology::link_or_create(NodeId src, NodeId dst) {
    if (src == dst) throw std::invalid_argument("self link");
    auto [it, inserted] = links_.try_emplace({src, dst});
    if (inserted) {
        it->second.src = src;
        it->second.dst = dst;
    }
    return it->second;
}

double Topology::prr_at(NodeId src, NodeId dst, std::int64_t time_ms) const {
    const DirectionalLink* l = link(src, dst);
    return l ? l->prr_at(time_ms) : 0.0;
}

std::optional<int> Topology::rssi(NodeId src, NodeId dst) const {
    const DirectionalLink* l = link(src, dst);
    return l ? l->rssi_dbm : std::nullopt;
}

std::vector<NodeId> Topology::neighbors_out(NodeId src) const {
    std::vector<NodeId> out;
    for (auto it = links_.lower_bound({src, 0}); it != links_.end() && it->first.first == src;
         ++it) {
        out.push_back(it->first.second);
    }
    return out;
}

std::int64_t Topology::last_sample_time_ms() const {
    std::int64_t last = 0;
    for (const auto& [key, l] : links_) {
        if (!l.prr_series.empty()) last = std::max(last, l.prr_series.back().time_ms);
    }
    return last;
}

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Connectivity over links whose weaker direction clears the floor: a node is
// only routable if both directions are usable.
bool connected_at_floor(const Topology& topo, double floor) {
    const std::size_t n = topo.node_count();
    std::vector<char> seen(n, 0);
    std::queue<NodeId> frontier;
    frontier.push(topo.root());
    seen[topo.root()] = 1;
    std::size_t reached = 1;
    while (!frontier.empty()) {
        const NodeId cur = frontier.front();
        frontier.pop();
        for (NodeId nb : topo.neighbors_out(cur)) {
            if (seen[nb]) continue;
            const double up = topo.prr_at(nb, cur, 0);
            const double down = topo.prr_at(cur, nb, 0);
            if (std::min(up, down) >= floor) {
                seen[nb] = 1;
                ++reached;
                frontier.push(nb);
            }
        }
    }
    return reached == n;
}

Topology generate_once(std::size_t node_count, Rng& rng, const SynthParams& params) {
    Topology topo(node_count, 0);
    std::vector<std::pair<double, double>> pos(node_count);
    for (auto& p : pos) {
        p.first = rng.uniform(0.0, params.area_size);
        p.second = rng.uniform(0.0, params.area_size);
    }
    for (NodeId a = 0; a < node_count; ++a) {
        for (NodeId b = static_cast<NodeId>(a + 1); b < node_count; ++b) {
            const double dx = pos[a].first - pos[b].first;
            const double dy = pos[a].second - pos[b].second;
            const double d = std::sqrt(dx * dx + dy * dy);
            if (d >= params.range) continue;
            const double base = clamp01(1.0 - (d / params.range) * (d / params.range));
            for (const auto& [src, dst] : {std::pair{a, b}, std::pair{b, a}}) {
                double prr = base;
                if (params.asymmetry_sigma > 0.0)
                    prr = clamp01(rng.normal(base, params.asymmetry_sigma));
                if (prr <= 0.0) continue;
                DirectionalLink& l = topo.link_or_create(src, dst);
                l.prr_series.push_back({0, prr});
                // RSSI consistent with the estimator's seed map, so that
                // first-hear guesses roughly reflect true quality.
                l.rssi_dbm = static_cast<int>(std::lround(-90.0 + 30.0 * prr));
            }
        }
    }
    return topo;
}

}  // namespace

Topology generate_synthetic(std::size_t node_count, std::uint64_t seed,
                            const SynthParams& params) {
    if (node_count < 2) throw std::invalid_argument("node_count must be >= 2");
    if (params.asymmetry_sigma < 0.0)
        throw std::invalid_argument("asymmetry_sigma must be >= 0");
    for (int attempt = 0; attempt < params.max_retries; ++attempt) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(attempt));
        Topology topo = generate_once(node_count, rng, params);
        if (connected_at_floor(topo, params.connectivity_floor)) return topo;
    }
    throw GenerationError("synthetic topology disconnected after max retries");
}

}  // namespace rplmesh
