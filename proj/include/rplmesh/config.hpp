/*
 * Scenario configuration: every engine and module constant, loadable from a
 * flat key-value file (`key = value`, '#' comments).
 */
#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "rplmesh/link_estimator.hpp"
#include "rplmesh/mac.hpp"
#include "rplmesh/metrics.hpp"
#include "rplmesh/topology.hpp"
#include "rplmesh/trace.hpp"

namespace rplmesh {

enum class RoutingMode { Storing, NonStoring };
enum class TrafficPattern { Downward, AnyToAny };

struct ScenarioConfig {
    RoutingMode mode = RoutingMode::NonStoring;
    Metric metric = Metric::etx();
    bool probing = true;
    int retries_r = 8;
    int probe_retries = -1;  // -1: same budget as retries_r

    TrafficPattern traffic_pattern = TrafficPattern::Downward;
    double rate_hz = 4.0;
    int payload_bytes = 16;
    double any_to_any_source_fraction = 0.1;
    double any_to_any_interval_s = 20.0;

    std::int64_t duration_s = 3600;
    std::int64_t warmup_s = 300;
    std::uint64_t seed = 1;

    // Topology source: a trace file, or synthetic when trace_path is empty.
    std::string trace_path;
    std::int64_t trace_window_ms = kDefaultWindowMs;
    std::size_t node_count = 50;
    NodeId root = 0;
    SynthParams synth;

    MacConfig mac;
    EstimatorConfig estimator;

    double hysteresis = 0.5;
    double probe_period_s = 60.0;
    double dio_period_s = 4.0;
    double dao_period_s = 60.0;
    std::size_t routes_capacity = 64;
    int hop_limit = 64;
    double snapshot_period_s = 10.0;
    bool emit_journeys = false;
    bool heterogeneous_addresses = false;

    // Offered load must stay below this bound (the scenario is provisioned
    // not to saturate); checked at validation time.
    double max_rate_hz = 100.0;

    void validate() const;
};

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

ScenarioConfig parse_config(std::istream& in);
ScenarioConfig load_config(const std::string& path);

// Builds the ground-truth topology the config describes (loads the trace or
// generates the synthetic network).
Topology build_topology(const ScenarioConfig& cfg);

}  // namespace rplmesh
