/*
 * Downward routing state for both modes of operation.
 *
 * Storing mode: per-node routing tables maintained by lossy hop-by-hop
 * registrations and de-registrations. Non-storing mode: a root-held global
 * parent map with loop-rejecting updates and source-route computation plus
 * header-size accounting.
 */
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "rplmesh/types.hpp"

namespace rplmesh {

class StoringTable {
  public:
    StoringTable() = default;
    explicit StoringTable(NodeId owner, std::size_t capacity = 64)
        : owner_(owner), capacity_(capacity) {}

    NodeId owner() const { return owner_; }
    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return routes_.size(); }
    const std::map<NodeId, NodeId>& routes() const { return routes_; }

    std::optional<NodeId> next_hop(NodeId dest) const;
    bool install(NodeId dest, NodeId via_child);  // false when full
    // Removes the entry for dest only if it points at via_child, so a late
    // de-registration cannot erase a newer route.
    bool remove(NodeId dest, NodeId via_child);
    void clear() { routes_.clear(); }

  private:
    NodeId owner_ = 0;
    std::size_t capacity_ = 64;
    std::map<NodeId, NodeId> routes_;  // dest -> next hop (a child)
};

struct LookupResult {
    enum class Action { Down, Up, NoRoute };
    Action action = Action::NoRoute;
    NodeId next_hop = 0;  // valid when action == Down
};

// Storing-mode forwarding decision. A packet already traveling downward
// (came_from_below = false) that misses the table is dropped: bouncing it
// back up would ping-pong between parent and child.
LookupResult storing_lookup(const StoringTable& table, NodeId dest,
                            std::optional<NodeId> parent, bool came_from_below);

struct RegistrationStep {
    NodeId node = 0;       // table owner the message reached
    bool applied = false;  // install/remove happened
    bool table_full = false;
};

// Registration travels hop by hop from the registering node (= dest,
// path.front()) toward the root (path.back()); each receiver on the delivered
// prefix installs dest -> forwarding child. A lost hop truncates propagation.
// hop_delivered.size() must be path.size()-1. tables is indexed by NodeId.
std::vector<RegistrationStep> storing_register(std::vector<StoringTable>& tables,
                                               std::span<const NodeId> path_child_to_root,
                                               NodeId dest,
                                               const std::vector<bool>& hop_delivered);

// De-registration along the old path; receivers remove their entry for dest
// when it matches the forwarding child.
std::vector<RegistrationStep> storing_deregister(std::vector<StoringTable>& tables,
                                                 std::span<const NodeId> path_child_to_root,
                                                 NodeId dest,
                                                 const std::vector<bool>& hop_delivered);

// The root's believed parent per node. Every accepted update preserves
// acyclicity, so there is a (possibly stale) route to every registered node
// at all times.
class RootTopologyView {
  public:
    explicit RootTopologyView(NodeId root) : root_(root) {}

    NodeId root() const { return root_; }
    std::uint64_t version() const { return version_; }
    const std::map<NodeId, NodeId>& parent_of() const { return parent_of_; }
    std::optional<NodeId> parent(NodeId node) const;

    enum class Update { Accepted, Rejected };
    Update update(NodeId child, NodeId new_parent);

    // Hops from the first node below the root down to dest; nullopt when dest
    // is not connected to the root in this view. Empty when dest == root.
    std::optional<std::vector<NodeId>> source_route(NodeId dest) const;

  private:
    NodeId root_;
    std::uint64_t version_ = 0;
    std::map<NodeId, NodeId> parent_of_;
};

using LinkAddress = std::array<std::uint8_t, 8>;

struct SourceRouteHeader {
    std::vector<NodeId> hops;
    int byte_size = 0;
};

// 6 fixed bytes plus one compressed address per hop. Compression drops the
// leading byte run shared by all hop addresses and the root's address; the
// shared network prefix costs nothing, a heterogeneous prefix costs 8 bytes
// per hop. The empty hop list emits no header (0 bytes).
int header_size(std::span<const NodeId> hops,
                const std::map<NodeId, LinkAddress>& addresses, NodeId root,
                bool prefix_shared = true);

// Source route plus its on-wire size; nullopt when dest is not connected to
// the root in the view.
std::optional<SourceRouteHeader> compute_source_route(
    const RootTopologyView& view, NodeId dest,
    const std::map<NodeId, LinkAddress>& addresses, bool prefix_shared = true);

// Default address plan: 6 fixed vendor bytes followed by the 16-bit node id,
// the best case for compression. heterogeneous=true randomizes the leading
// bytes per node to exercise the 8-byte worst case.
std::map<NodeId, LinkAddress> make_addresses(std::size_t node_count, bool heterogeneous,
                                             std::uint64_t seed = 0);

enum class NodeStatus { Reachable, Outdated, Unreachable };

constexpr std::string_view node_status_label(NodeStatus s) {
    switch (s) {
        case NodeStatus::Reachable: return "REACHABLE";
        case NodeStatus::Outdated: return "OUTDATED";
        case NodeStatus::Unreachable: return "UNREACHABLE";
    }
    return "?";
}

struct ConsistencySnapshot {
    std::int64_t time_ms = 0;
    std::vector<NodeStatus> status;  // indexed by NodeId; root is Reachable
};

// Classification per destination, derived purely from routing state plus the
// true current parents:
//   REACHABLE   a zero-loss walk over the routing state reaches the node and
//               every node's state about it is current;
//   OUTDATED    the walk succeeds but some node holds a stale or missing
//               entry for the destination;
//   UNREACHABLE the walk terminates without reaching the destination.
ConsistencySnapshot snapshot_storing(const std::vector<StoringTable>& tables,
                                     std::span<const std::optional<NodeId>> true_parent,
                                     NodeId root, std::int64_t time_ms);

ConsistencySnapshot snapshot_nonstoring(const RootTopologyView& view,
                                        std::span<const std::optional<NodeId>> true_parent,
                                        std::int64_t time_ms);

}  // namespace rplmesh
