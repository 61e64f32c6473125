#include "rplmesh/replay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace rplmesh {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

struct WindowState {
    std::vector<double> rank;
    std::vector<std::optional<NodeId>> parent;
};

// One selection pass; returns true when any parent or rank changed. The study
// runs each window to a fixed point (hysteresis 0: it measures what the
// metric can achieve, not switching dynamics).
bool selection_pass(const Topology& topo, const Metric& metric,
                    const std::vector<std::vector<NodeId>>& in_neighbors,
                    std::int64_t t, WindowState& st) {
    bool changed = false;
    for (NodeId node = 0; node < topo.node_count(); ++node) {
        if (node == topo.root()) continue;
        std::vector<ParentCandidate> candidates;
        for (const NodeId nb : in_neighbors[node]) {
            const double prr_up = topo.prr_at(node, nb, t);
            if (prr_up <= 0.0 || !std::isfinite(st.rank[nb])) continue;
            candidates.push_back(
                {nb, st.rank[nb], metric.rank_through_prr(st.rank[nb], prr_up)});
        }
        const auto choice = select_parent(candidates, st.parent[node], 0.0);
        double new_rank = kInf;
        if (choice) {
            new_rank =
                metric.rank_through_prr(st.rank[*choice], topo.prr_at(node, *choice, t));
        }
        if (choice != st.parent[node] || new_rank != st.rank[node]) {
            st.parent[node] = choice;
            st.rank[node] = new_rank;
            changed = true;
        }
    }
    return changed;
}

}  // namespace

std::vector<ReplayMetricResult> replay_metric_study(const Topology& topo,
                                                    std::span<const Metric> metrics,
                                                    int retries_r,
                                                    std::int64_t window_ms) {
    const std::size_t n = topo.node_count();

    // Window grid covering every sample in the trace.
    const std::int64_t last = topo.last_sample_time_ms();
    std::vector<std::int64_t> windows;
    for (std::int64_t t = 0; t <= last; t += window_ms) windows.push_back(t);

    // Upward candidate sets: who each node could pick as a parent.
    std::vector<std::vector<NodeId>> in_neighbors(n);
    for (const auto& [key, link] : topo.links()) in_neighbors[key.first].push_back(key.second);

    std::vector<ReplayMetricResult> results;
    for (const Metric& metric_in : metrics) {
        Metric metric = metric_in;
        if (metric.kind == MetricKind::Lr) metric.retries_r = retries_r;

        WindowState st;
        st.rank.assign(n, kInf);
        st.parent.assign(n, std::nullopt);
        st.rank[topo.root()] = metric.root_rank();

        std::vector<std::vector<double>> up_pdr(n), down_pdr(n);
        ReplayMetricResult res;
        res.metric = metric;
        res.per_node.resize(n);
        for (NodeId id = 0; id < n; ++id) res.per_node[id].node = id;

        for (const std::int64_t t : windows) {
            const auto previous_parent = st.parent;
            for (std::size_t pass = 0; pass < n; ++pass) {
                if (!selection_pass(topo, metric, in_neighbors, t, st)) break;
            }

            for (NodeId node = 0; node < n; ++node) {
                if (node == topo.root()) continue;
                ReplayNodeStats& stats = res.per_node[node];
                if (previous_parent[node] && st.parent[node] != previous_parent[node])
                    ++stats.parent_switches;
                if (!st.parent[node]) continue;
                stats.joined = true;

                // Walk the parent chain and collect both directions.
                std::vector<double> ups, downs;
                NodeId cur = node;
                bool reached_root = true;
                while (cur != topo.root()) {
                    if (!st.parent[cur] || ups.size() > n) {
                        reached_root = false;
                        break;
                    }
                    const NodeId p = *st.parent[cur];
                    ups.push_back(topo.prr_at(cur, p, t));
                    downs.push_back(topo.prr_at(p, cur, t));
                    cur = p;
                }
                if (!reached_root) continue;

                up_pdr[node].push_back(path_delivery(ups, retries_r));
                down_pdr[node].push_back(path_delivery_down(downs, retries_r));
                stats.min_up_prr = std::min(stats.min_up_prr, ups.front());
                stats.min_down_prr = std::min(stats.min_down_prr, downs.front());
                stats.hops_last = static_cast<int>(ups.size());
            }
        }

        std::vector<double> up_medians, down_medians, hops;
        for (NodeId node = 0; node < n; ++node) {
            ReplayNodeStats& stats = res.per_node[node];
            if (node == topo.root() || !stats.joined) continue;
            stats.up_pdr_median = median_of(up_pdr[node]);
            stats.down_pdr_median = median_of(down_pdr[node]);
            up_medians.push_back(stats.up_pdr_median);
            down_medians.push_back(stats.down_pdr_median);
            hops.push_back(static_cast<double>(stats.hops_last));
            res.min_up_prr = std::min(res.min_up_prr, stats.min_up_prr);
            res.min_down_prr = std::min(res.min_down_prr, stats.min_down_prr);
            res.total_switches += stats.parent_switches;
        }
        res.median_up_pdr = median_of(up_medians);
        res.median_down_pdr = median_of(down_medians);
        double hop_sum = 0.0;
        for (double h : hops) hop_sum += h;
        res.mean_hops = hops.empty() ? 0.0 : hop_sum / static_cast<double>(hops.size());
        results.push_back(std::move(res));
    }
    return results;
}

std::string ReplayMetricResult::csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "metric,node_id,joined,up_pdr_median,down_pdr_median,min_up_prr,"
           "min_down_prr,hops_last,parent_switches\n";
    for (const auto& s : per_node) {
        out << metric.label() << ',' << s.node << ',' << (s.joined ? 1 : 0) << ','
            << s.up_pdr_median << ',' << s.down_pdr_median << ',' << s.min_up_prr << ','
            << s.min_down_prr << ',' << s.hops_last << ',' << s.parent_switches << '\n';
    }
    return out.str();
}

std::string replay_summary_json(std::span<const ReplayMetricResult> results) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& r : results) {
        j.push_back({{"metric", r.metric.label()},
                     {"median_up_pdr", r.median_up_pdr},
                     {"median_down_pdr", r.median_down_pdr},
                     {"min_up_prr", r.min_up_prr},
                     {"min_down_prr", r.min_down_prr},
                     {"mean_hops", r.mean_hops},
                     {"parent_switches", r.total_switches}});
    }
    return j.dump(2) + "\n";
}

}  // namespace rplmesh
