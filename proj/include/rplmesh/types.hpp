/*
 * Shared domain types: node identifiers and terminal packet-loss causes.
 */
#pragma once

#include <cstdint>
#include <string_view>

namespace rplmesh {

// Node ids are dense in [0, node_count). 16 bits covers testbed scale and
// doubles as the compressible tail of the 8-byte link address.
using NodeId = std::uint16_t;

// Terminal causes a lost packet can carry. Exactly one per lost packet.
enum class LossCause {
    MacDrop,            // discarded after 1+R failed attempts
    RouteNotFound,      // no routing state led to the destination
    SpuriousDuplicate,  // dropped by duplicate detection although not a duplicate
    QueueOverflow,      // bounded MAC queue was full
};

inline constexpr int kLossCauseCount = 4;

constexpr std::string_view loss_cause_label(LossCause c) {
    switch (c) {
        case LossCause::MacDrop: return "mac_drop";
        case LossCause::RouteNotFound: return "route_not_found";
        case LossCause::SpuriousDuplicate: return "spurious_duplicate";
        case LossCause::QueueOverflow: return "queue_overflow";
    }
    return "unknown";
}

}  // namespace rplmesh
