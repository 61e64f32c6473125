/*
 * Trace-replay metric study: per window, update link knowledge, recompute
 * ranks, perform parent selection, and record the analytic end-to-end
 * delivery each node would see upward and downward, the PRR of its selected
 * links, its hop count, and its parent switches. Link estimates are the
 * idealized per-window PRRs from the trace itself.
 */
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rplmesh/metrics.hpp"
#include "rplmesh/topology.hpp"
#include "rplmesh/trace.hpp"

namespace rplmesh {

struct ReplayNodeStats {
    NodeId node = 0;
    bool joined = false;          // ever had a parent
    double up_pdr_median = 0.0;   // analytic path delivery toward the root
    double down_pdr_median = 0.0;
    double min_up_prr = 1.0;      // worst selected uplink PRR over windows
    double min_down_prr = 1.0;
    int hops_last = 0;
    int parent_switches = 0;
};

struct ReplayMetricResult {
    Metric metric;
    std::vector<ReplayNodeStats> per_node;

    // Aggregates over joined nodes.
    double median_up_pdr = 0.0;    // median over nodes of per-node medians
    double median_down_pdr = 0.0;
    double min_up_prr = 1.0;       // worst selected link over all nodes/windows
    double min_down_prr = 1.0;
    double mean_hops = 0.0;
    int total_switches = 0;

    std::string csv() const;  // metric,node_id,... one row per node
};

std::vector<ReplayMetricResult> replay_metric_study(
    const Topology& topo, std::span<const Metric> metrics, int retries_r,
    std::int64_t window_ms = kDefaultWindowMs);

std::string replay_summary_json(std::span<const ReplayMetricResult> results);

}  // namespace rplmesh
