#include "rplmesh/link_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rplmesh {

double etx_from_rssi(int rssi_dbm) {
    const double guess_prr = std::clamp((static_cast<double>(rssi_dbm) + 90.0) / 30.0, 0.25, 1.0);
    return 1.0 / guess_prr;
}

NeighborTable::NeighborTable(NodeId owner, EstimatorConfig cfg)
    : owner_(owner), cfg_(cfg) {
    if (cfg_.capacity < 1) throw std::invalid_argument("capacity must be >= 1");
}

const NeighborEntry* NeighborTable::find(NodeId neighbor) const {
    auto it = entries_.find(neighbor);
    return it == entries_.end() ? nullptr : &it->second;
}

NeighborEntry* NeighborTable::find(NodeId neighbor) {
    auto it = entries_.find(neighbor);
    return it == entries_.end() ? nullptr : &it->second;
}

void NeighborTable::set_preferred_parent(std::optional<NodeId> parent) {
    if (parent && !find(*parent))
        throw std::invalid_argument("preferred parent must be present in the table");
    preferred_parent_ = parent;
}

std::optional<NodeId> NeighborTable::pick_eviction_victim() const {
    // Lowest freshness wins; never the preferred parent. Ties go to the
    // lowest id so eviction is deterministic.
    std::optional<NodeId> victim;
    double victim_freshness = 0.0;
    for (const auto& [id, e] : entries_) {
        if (preferred_parent_ && id == *preferred_parent_) continue;
        if (!victim || e.freshness < victim_freshness) {
            victim = id;
            victim_freshness = e.freshness;
        }
    }
    return victim;
}

NeighborEntry& NeighborTable::insert_entry(NodeId neighbor, double seed_etx,
                                           std::int64_t now_ms) {
    NeighborEntry e;
    e.neighbor = neighbor;
    e.etx_estimate = seed_etx;
    e.freshness = cfg_.freshness_max;
    e.last_update_ms = now_ms;
    e.last_decay_ms_ = now_ms;
    return entries_.emplace(neighbor, e).first->second;
}

NeighborTable::UpdateResult NeighborTable::observe(NodeId neighbor,
                                                   std::optional<int> rssi_dbm,
                                                   std::int64_t now_ms) {
    if (NeighborEntry* existing = find(neighbor)) return {existing, std::nullopt};
    UpdateResult result;
    if (entries_.size() >= cfg_.capacity) {
        result.evicted = pick_eviction_victim();
        if (!result.evicted) return result;  // table full of protected entries
        entries_.erase(*result.evicted);
    }
    // -75 dBm is the mid-range default when the radio gave no reading.
    result.entry = &insert_entry(neighbor, etx_from_rssi(rssi_dbm.value_or(-75)), now_ms);
    return result;
}

NeighborTable::UpdateResult NeighborTable::update_on_tx(NodeId neighbor, int attempts,
                                                        bool delivered,
                                                        std::int64_t now_ms) {
    if (attempts < 1) throw std::invalid_argument("attempts must be >= 1");
    UpdateResult result;
    NeighborEntry* e = find(neighbor);
    if (!e) {
        if (entries_.size() >= cfg_.capacity) {
            result.evicted = pick_eviction_victim();
            if (!result.evicted) return result;
            entries_.erase(*result.evicted);
        }
        e = &insert_entry(neighbor, static_cast<double>(attempts), now_ms);
    }
    // A failed delivery used all 1+R attempts, so the penalty is
    // min(1.5*(1+R), cap).
    const double penalty = std::min(1.5 * static_cast<double>(attempts), cfg_.penalty_cap);
    const double sample = delivered ? static_cast<double>(attempts) : penalty;
    e->etx_estimate = cfg_.ewma_alpha * sample + (1.0 - cfg_.ewma_alpha) * e->etx_estimate;
    e->freshness = cfg_.freshness_max;
    e->last_update_ms = now_ms;
    e->last_decay_ms_ = now_ms;
    result.entry = e;
    return result;
}

void NeighborTable::decay_freshness(std::int64_t now_ms) {
    for (auto& [id, e] : entries_) {
        const std::int64_t dt = now_ms - e.last_decay_ms_;
        if (dt <= 0) continue;
        e.freshness *= std::exp2(-static_cast<double>(dt) /
                                 static_cast<double>(cfg_.half_life_ms));
        e.last_decay_ms_ = now_ms;
    }
}

std::optional<NodeId> NeighborTable::select_probe_target(
    bool coin, const std::function<double(const NeighborEntry&)>& would_be_rank) const {
    if (entries_.empty()) return std::nullopt;

    if (preferred_parent_) {
        const NeighborEntry* parent = find(*preferred_parent_);
        if (parent && !is_fresh(*parent)) return preferred_parent_;
    }

    if (!coin) {
        std::optional<NodeId> best;
        double best_rank = std::numeric_limits<double>::infinity();
        for (const auto& [id, e] : entries_) {
            if (!e.is_potential_parent || is_fresh(e)) continue;
            const double r = would_be_rank(e);
            if (!best || r < best_rank) {
                best = id;
                best_rank = r;
            }
        }
        if (best) return best;
    }

    // Least-recently-updated overall; ties to the lowest id.
    std::optional<NodeId> oldest;
    std::int64_t oldest_time = 0;
    for (const auto& [id, e] : entries_) {
        if (!oldest || e.last_update_ms < oldest_time) {
            oldest = id;
            oldest_time = e.last_update_ms;
        }
    }
    return oldest;
}

bool NeighborTable::schedule_immediate_probe(NodeId new_parent) const {
    const NeighborEntry* e = find(new_parent);
    if (!e) throw std::invalid_argument("unknown neighbor");
    return !is_fresh(*e);
}

void NeighborTable::refresh_potential_parents(double own_rank) {
    for (auto& [id, e] : entries_)
        e.is_potential_parent = e.advertised_rank < own_rank;
}

void NeighborTable::note_advertised_rank(NodeId neighbor, double advertised_rank) {
    if (NeighborEntry* e = find(neighbor)) e->advertised_rank = advertised_rank;
}

}  // namespace rplmesh
