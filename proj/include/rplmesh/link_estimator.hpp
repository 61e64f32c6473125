/*
 * Per-node neighbor table: EWMA link estimates seeded from RSSI, an
 * exponentially decaying freshness counter, and probing-target selection.
 * Owned by exactly one simulated node; all mutation comes from the single
 * engine loop.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "rplmesh/types.hpp"

namespace rplmesh {

struct EstimatorConfig {
    double ewma_alpha = 0.15;
    double freshness_max = 16.0;       // F_MAX, value right after an update
    double freshness_threshold = 2.0;  // entry is fresh iff freshness >= this
    std::int64_t half_life_ms = 240'000;
    double penalty_cap = 12.0;         // failed delivery sample = min(1.5*(1+R), cap)
    std::size_t capacity = 32;
};

struct NeighborEntry {
    NodeId neighbor = 0;
    double etx_estimate = 1.0;  // >= 1
    double freshness = 0.0;
    std::int64_t last_update_ms = 0;
    bool is_potential_parent = false;
    // Advertised rank from the neighbor's latest beacon; +inf until heard.
    double advertised_rank = std::numeric_limits<double>::infinity();

  private:
    friend class NeighborTable;
    std::int64_t last_decay_ms_ = 0;
};

// ETX = 1 / guess_prr with guess_prr = clamp((rssi + 90) / 30, 0.25, 1.0).
// Out-of-range RSSI is clamped, never an error.
double etx_from_rssi(int rssi_dbm);

class NeighborTable {
  public:
    explicit NeighborTable(NodeId owner, EstimatorConfig cfg = {});

    NodeId owner() const { return owner_; }
    const EstimatorConfig& config() const { return cfg_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    const NeighborEntry* find(NodeId neighbor) const;
    NeighborEntry* find(NodeId neighbor);
    const std::map<NodeId, NeighborEntry>& entries() const { return entries_; }

    std::optional<NodeId> preferred_parent() const { return preferred_parent_; }
    void set_preferred_parent(std::optional<NodeId> parent);

    struct UpdateResult {
        NeighborEntry* entry = nullptr;  // nullptr when the table was full
        std::optional<NodeId> evicted;
    };

    // First-hear path: creates (or refreshes the seed of a never-measured)
    // entry from the packet's RSSI. Existing measured entries are untouched.
    UpdateResult observe(NodeId neighbor, std::optional<int> rssi_dbm, std::int64_t now_ms);

    // Transmission feedback: sample = attempts if delivered, else the penalty
    // value; estimate <- alpha*sample + (1-alpha)*estimate; freshness reset.
    UpdateResult update_on_tx(NodeId neighbor, int attempts, bool delivered,
                              std::int64_t now_ms);

    // freshness <- freshness * 2^(-dt / half_life) per entry.
    void decay_freshness(std::int64_t now_ms);

    bool is_fresh(const NeighborEntry& e) const {
        return e.freshness >= cfg_.freshness_threshold;
    }

    // Probing policy: the preferred parent if its estimate is stale; else
    // (coin=0) the best stale potential parent by would-be rank, falling back
    // to the least-recently-updated entry. Assumes decay was applied.
    std::optional<NodeId> select_probe_target(
        bool coin, const std::function<double(const NeighborEntry&)>& would_be_rank) const;

    // True iff switching to new_parent warrants an immediate probe (its
    // estimate is not fresh). Throws if the neighbor is unknown.
    bool schedule_immediate_probe(NodeId new_parent) const;

    // Marks entries whose advertised rank would improve on own_rank.
    void refresh_potential_parents(double own_rank);

    // Records the neighbor's advertised rank from a received beacon.
    void note_advertised_rank(NodeId neighbor, double advertised_rank);

  private:
    NeighborEntry& insert_entry(NodeId neighbor, double seed_etx, std::int64_t now_ms);
    std::optional<NodeId> pick_eviction_victim() const;

    NodeId owner_;
    EstimatorConfig cfg_;
    std::map<NodeId, NeighborEntry> entries_;
    std::optional<NodeId> preferred_parent_;
};

}  // namespace rplmesh
