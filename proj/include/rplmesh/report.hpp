/*
 * Per-run results: packet accounting by terminal cause, latency and link
 * quality distributions, churn, consistency timeline, and the rule-of-three
 * bound for zero-loss runs. Serialization is byte-stable for a given build,
 * so identical (config, seed) pairs produce identical files.
 */
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rplmesh/routing.hpp"
#include "rplmesh/types.hpp"

namespace rplmesh {

struct PacketHop {
    NodeId from = 0;
    NodeId to = 0;
    int attempts = 0;
    bool delivered = false;
};

struct PacketJourney {
    std::uint64_t packet_id = 0;
    NodeId src = 0;
    NodeId dst = 0;
    std::int64_t send_time_ms = 0;
    std::vector<PacketHop> hops;
    bool delivered = false;
    std::optional<LossCause> cause;  // exactly one iff lost
    std::int64_t end_time_ms = 0;

    std::int64_t latency_ms() const { return end_time_ms - send_time_ms; }
    int delivered_hop_count() const;
};

struct DistributionSummary {
    std::size_t count = 0;
    double min = 0.0, median = 0.0, mean = 0.0, p99 = 0.0, max = 0.0;

    static DistributionSummary of(std::vector<double> samples);
};

// With zero losses the loss rate is at most 3/n at 95% confidence; with
// losses it is the observed rate. n must be >= 1.
double rule_of_three(std::uint64_t n_sent, std::uint64_t losses);

struct RunReport {
    // Accounting (post-warmup packets only).
    std::uint64_t packets_sent = 0;
    std::uint64_t delivered = 0;
    std::array<std::uint64_t, kLossCauseCount> losses_by_cause{};
    std::uint64_t total_losses() const;
    double loss_rate() const;

    DistributionSummary latency_ms;
    DistributionSummary hop_count;
    DistributionSummary up_link_prr;    // PRR of selected uplinks at snapshots
    DistributionSummary down_link_prr;  // same links, parent->child direction
    DistributionSummary parent_staleness_s;  // age of parent estimates at snapshots
    DistributionSummary header_bytes;   // source-route header sizes (non-storing)

    int radius_hops = 0;  // farthest node's depth at the end of the run
    std::uint64_t parent_switches = 0;
    double switches_per_node_hour = 0.0;
    std::uint64_t control_drops = 0;  // control frames lost to full queues
    std::uint64_t dao_rejects = 0;    // loop-inducing updates the root refused
    bool saturated = false;

    std::vector<ConsistencySnapshot> consistency;
    std::map<std::string, std::uint64_t> consistency_totals;  // status -> node-snapshots

    std::vector<PacketJourney> journeys;  // populated when the config asks
    bool journeys_recorded = false;

    // Echo of the scenario for traceability.
    std::map<std::string, std::string> scenario;

    std::string to_json() const;
    std::string causes_csv() const;
    std::string consistency_csv() const;
    std::string journeys_csv() const;
};

// Writes report.json, causes.csv, consistency.csv (and journeys.csv when
// recorded) into out_dir. Creates the directory if needed; an unwritable
// path raises std::runtime_error.
void emit_report(const RunReport& report, const std::string& out_dir);

}  // namespace rplmesh
