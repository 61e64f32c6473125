/*
 * Trace file ingestion. Format, one event per line:
 *
 *   TX <time_ms> <sender_id> <seqno>
 *   RX <time_ms> <sender_id> <receiver_id> <seqno> [rssi_dbm]
 *
 * Lines starting with '#' are comments. Per ordered pair and window, a PRR
 * sample RX/TX is appended; pairs never received on get no link.
 */
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rplmesh/topology.hpp"

namespace rplmesh {

inline constexpr std::int64_t kDefaultWindowMs = 60'000;

struct TraceEvent {
    enum class Kind { Tx, Rx };
    std::int64_t time_ms = 0;
    Kind kind = Kind::Tx;
    NodeId sender = 0;
    NodeId receiver = 0;  // Rx only
    int seqno = 0;
    std::optional<int> rssi_dbm;
};

class TraceParseError : public std::runtime_error {
  public:
    TraceParseError(const std::string& message, std::size_t line)
        : std::runtime_error(message + " (line " + std::to_string(line) + ")"),
          line_number(line) {}
    std::size_t line_number;
};

class TraceValidationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

std::vector<TraceEvent> parse_trace(std::istream& in);
std::vector<TraceEvent> parse_trace_file(const std::string& path);

// Windowed PRR extraction. Node count is inferred from the largest id seen.
Topology load_trace(const std::string& path, std::int64_t window_ms = kDefaultWindowMs,
                    NodeId root = 0);
Topology load_trace(std::istream& in, std::int64_t window_ms = kDefaultWindowMs,
                    NodeId root = 0);

// Emits a trace whose windowed reload reproduces `topo` exactly, provided every
// PRR sample is a ratio of small integers (which holds for trace-derived
// topologies). Samples must be aligned to window starts.
void save_trace(const Topology& topo, std::ostream& out,
                std::int64_t window_ms = kDefaultWindowMs);
void save_trace(const Topology& topo, const std::string& path,
                std::int64_t window_ms = kDefaultWindowMs);

}  // namespace rplmesh
