/*
 * Ground-truth network model: nodes and directional, time-varying link
 * qualities. Links are stored independently per direction; asymmetry is
 * first-class. A Topology is immutable once built and safe to share
 * read-only across concurrent runs.
 */
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rplmesh/types.hpp"

namespace rplmesh {

struct PrrSample {
    std::int64_t time_ms = 0;
    double prr = 0.0;  // [0,1]

    friend bool operator==(const PrrSample&, const PrrSample&) = default;
};

// Packet reception ratio of one ordered node pair over time. The series is a
// right-continuous step function; queries before the first sample return the
// first sample's value.
struct DirectionalLink {
    NodeId src = 0;
    NodeId dst = 0;
    std::vector<PrrSample> prr_series;  // time_ms strictly increasing
    std::optional<int> rssi_dbm;

    double prr_at(std::int64_t time_ms) const;

    friend bool operator==(const DirectionalLink&, const DirectionalLink&) = default;
};

class Topology {
  public:
    Topology() = default;
    Topology(std::size_t node_count, NodeId root);

    std::size_t node_count() const { return node_count_; }
    NodeId root() const { return root_; }

    const DirectionalLink* link(NodeId src, NodeId dst) const;
    DirectionalLink& link_or_create(NodeId src, NodeId dst);

    // 0 if the pair has no link.
    double prr_at(NodeId src, NodeId dst, std::int64_t time_ms) const;
    std::optional<int> rssi(NodeId src, NodeId dst) const;

    // Destinations src has a link to, ascending.
    std::vector<NodeId> neighbors_out(NodeId src) const;

    const std::map<std::pair<NodeId, NodeId>, DirectionalLink>& links() const {
        return links_;
    }

    // Largest sample timestamp over all links (0 if none).
    std::int64_t last_sample_time_ms() const;

    friend bool operator==(const Topology&, const Topology&) = default;

  private:
    std::size_t node_count_ = 0;
    NodeId root_ = 0;
    std::map<std::pair<NodeId, NodeId>, DirectionalLink> links_;
};

struct SynthParams {
    double area_size = 100.0;          // side of the placement square
    double range = 40.0;               // distance at which base PRR reaches 0
    double asymmetry_sigma = 0.0;      // per-direction Gaussian PRR noise
    double connectivity_floor = 0.3;   // graph must be connected over links with
                                       // min(up, down) PRR >= floor
    int max_retries = 32;              // placement attempts before giving up
};

class GenerationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Uniform node placement, base PRR = clamp(1 - (d/range)^2, 0, 1), each
// direction independently perturbed by N(0, asymmetry_sigma) and clamped.
// Deterministic for a given seed; node 0 is the root.
Topology generate_synthetic(std::size_t node_count, std::uint64_t seed,
                            const SynthParams& params = {});

}  // namespace rplmesh
