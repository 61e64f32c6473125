#include "rplmesh/config.hpp"

#include <fstream>
#include <sstream>

#include "rplmesh/trace.hpp"

namespace rplmesh {

void ScenarioConfig::validate() const {
    if (duration_s <= 0) throw ConfigError("duration_s must be positive");
    if (warmup_s < 0 || warmup_s >= duration_s)
        throw ConfigError("warmup_s must be in [0, duration_s)");
    if (rate_hz <= 0.0) throw ConfigError("rate_hz must be positive");
    if (rate_hz > max_rate_hz)
        throw ConfigError("rate_hz exceeds the saturation bound max_rate_hz");
    if (retries_r < 0) throw ConfigError("retries_r must be >= 0");
    if (mac.queue_capacity < 1) throw ConfigError("queue_capacity must be >= 1");
    if (trace_path.empty() && node_count < 2)
        throw ConfigError("node_count must be >= 2");
    if (hysteresis < 0.0) throw ConfigError("hysteresis must be >= 0");
    if (hop_limit < 1) throw ConfigError("hop_limit must be >= 1");
    if (metric.kind == MetricKind::EtxN && metric.exponent_n < 1.0)
        throw ConfigError("exponent_n must be >= 1");
}

namespace {

bool parse_bool(const std::string& v, std::size_t line) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("bad boolean '" + v + "' (line " + std::to_string(line) + ")");
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

ScenarioConfig parse_config(std::istream& in) {
    ScenarioConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    double exponent_n = 2.0;
    std::string metric_name = "etx";
    bool metric_seen = false;

    while (std::getline(in, line)) {
        ++line_no;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key = value (line " + std::to_string(line_no) + ")");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("empty key or value (line " + std::to_string(line_no) + ")");

        try {
            if (key == "mode") {
                if (value == "storing") cfg.mode = RoutingMode::Storing;
                else if (value == "nonstoring") cfg.mode = RoutingMode::NonStoring;
                else throw ConfigError("mode must be storing|nonstoring");
            } else if (key == "metric") {
                metric_name = value;
                metric_seen = true;
            } else if (key == "exponent_n") {
                exponent_n = std::stod(value);
            } else if (key == "retries_r") {
                cfg.retries_r = std::stoi(value);
            } else if (key == "probe_retries") {
                cfg.probe_retries = std::stoi(value);
            } else if (key == "probing") {
                cfg.probing = parse_bool(value, line_no);
            } else if (key == "dup_mode") {
                if (value == "naive") cfg.mac.dup_mode = DupMode::Naive;
                else if (value == "enhanced") cfg.mac.dup_mode = DupMode::Enhanced;
                else throw ConfigError("dup_mode must be naive|enhanced");
            } else if (key == "traffic_pattern") {
                if (value == "downward") cfg.traffic_pattern = TrafficPattern::Downward;
                else if (value == "any_to_any") cfg.traffic_pattern = TrafficPattern::AnyToAny;
                else throw ConfigError("traffic_pattern must be downward|any_to_any");
            } else if (key == "rate_hz") {
                cfg.rate_hz = std::stod(value);
            } else if (key == "payload_bytes") {
                cfg.payload_bytes = std::stoi(value);
            } else if (key == "any_to_any_source_fraction") {
                cfg.any_to_any_source_fraction = std::stod(value);
            } else if (key == "any_to_any_interval_s") {
                cfg.any_to_any_interval_s = std::stod(value);
            } else if (key == "duration_s") {
                cfg.duration_s = std::stoll(value);
            } else if (key == "warmup_s") {
                cfg.warmup_s = std::stoll(value);
            } else if (key == "seed") {
                cfg.seed = std::stoull(value);
            } else if (key == "trace_path") {
                cfg.trace_path = value;
            } else if (key == "trace_window_ms") {
                cfg.trace_window_ms = std::stoll(value);
            } else if (key == "node_count") {
                cfg.node_count = std::stoul(value);
            } else if (key == "root") {
                cfg.root = static_cast<NodeId>(std::stoul(value));
            } else if (key == "area_size") {
                cfg.synth.area_size = std::stod(value);
            } else if (key == "range") {
                cfg.synth.range = std::stod(value);
            } else if (key == "asymmetry_sigma") {
                cfg.synth.asymmetry_sigma = std::stod(value);
            } else if (key == "connectivity_floor") {
                cfg.synth.connectivity_floor = std::stod(value);
            } else if (key == "queue_capacity") {
                cfg.mac.queue_capacity = std::stoul(value);
            } else if (key == "per_attempt_delay_ms") {
                cfg.mac.per_attempt_delay_ms = std::stoll(value);
            } else if (key == "seq_lifetime_ms") {
                cfg.mac.seq_lifetime_ms = std::stoll(value);
            } else if (key == "naive_ring_size") {
                cfg.mac.naive_ring_size = std::stoul(value);
            } else if (key == "ewma_alpha") {
                cfg.estimator.ewma_alpha = std::stod(value);
            } else if (key == "freshness_max") {
                cfg.estimator.freshness_max = std::stod(value);
            } else if (key == "freshness_threshold") {
                cfg.estimator.freshness_threshold = std::stod(value);
            } else if (key == "freshness_half_life_s") {
                cfg.estimator.half_life_ms = static_cast<std::int64_t>(std::stod(value) * 1000);
            } else if (key == "neighbor_capacity") {
                cfg.estimator.capacity = std::stoul(value);
            } else if (key == "hysteresis") {
                cfg.hysteresis = std::stod(value);
            } else if (key == "probe_period_s") {
                cfg.probe_period_s = std::stod(value);
            } else if (key == "dio_period_s") {
                cfg.dio_period_s = std::stod(value);
            } else if (key == "dao_period_s") {
                cfg.dao_period_s = std::stod(value);
            } else if (key == "routes_capacity") {
                cfg.routes_capacity = std::stoul(value);
            } else if (key == "hop_limit") {
                cfg.hop_limit = std::stoi(value);
            } else if (key == "snapshot_period_s") {
                cfg.snapshot_period_s = std::stod(value);
            } else if (key == "emit_journeys") {
                cfg.emit_journeys = parse_bool(value, line_no);
            } else if (key == "heterogeneous_addresses") {
                cfg.heterogeneous_addresses = parse_bool(value, line_no);
            } else if (key == "max_rate_hz") {
                cfg.max_rate_hz = std::stod(value);
            } else {
                throw ConfigError("unknown key '" + key + "'");
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError("bad value for '" + key + "' (line " +
                              std::to_string(line_no) + ")");
        }
    }

    if (metric_seen || exponent_n != 2.0) {
        if (metric_name == "etxn") {
            cfg.metric = Metric::etxn(exponent_n);
        } else {
            cfg.metric = Metric::parse(metric_name, cfg.retries_r);
        }
    }
    cfg.mac.retries_r = cfg.retries_r;
    if (cfg.metric.kind == MetricKind::Lr) cfg.metric.retries_r = cfg.retries_r;
    cfg.validate();
    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse_config(in);
}

Topology build_topology(const ScenarioConfig& cfg) {
    if (!cfg.trace_path.empty())
        return load_trace(cfg.trace_path, cfg.trace_window_ms, cfg.root);
    if (cfg.root != 0)
        throw ConfigError("synthetic topologies place the root at node 0");
    return generate_synthetic(cfg.node_count, cfg.seed, cfg.synth);
}

}  // namespace rplmesh
