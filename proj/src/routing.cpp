#include "rplmesh/routing.hpp"

#include <algorithm>
#include <stdexcept>

#include "rplmesh/rng.hpp"

namespace rplmesh {

std::optional<NodeId> StoringTable::next_hop(NodeId dest) const {
    auto it = routes_.find(dest);
    return it == routes_.end() ? std::nullopt : std::optional<NodeId>(it->second);
}

bool StoringTable::install(NodeId dest, NodeId via_child) {
    auto it = routes_.find(dest);
    if (it != routes_.end()) {
        it->second = via_child;
        return true;
    }
    if (routes_.size() >= capacity_) return false;
    routes_.emplace(dest, via_child);
    return true;
}

bool StoringTable::remove(NodeId dest, NodeId via_child) {
    auto it = routes_.find(dest);
    if (it == routes_.end() || it->second != via_child) return false;
    routes_.erase(it);
    return true;
}

LookupResult storing_lookup(const StoringTable& table, NodeId dest,
                            std::optional<NodeId> parent, bool came_from_below) {
    if (auto nh = table.next_hop(dest)) return {LookupResult::Action::Down, *nh};
    if (came_from_below && parent) return {LookupResult::Action::Up, *parent};
    return {LookupResult::Action::NoRoute, 0};
}

namespace {

std::vector<RegistrationStep> walk_registration(std::vector<StoringTable>& tables,
                                                std::span<const NodeId> path,
                                                NodeId dest,
                                                const std::vector<bool>& hop_delivered,
                                                bool installing) {
    if (path.size() < 2) throw std::invalid_argument("path needs at least two nodes");
    if (hop_delivered.size() != path.size() - 1)
        throw std::invalid_argument("one delivery outcome per hop expected");
    std::vector<RegistrationStep> steps;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        if (!hop_delivered[i]) break;  // loss truncates propagation upward
        const NodeId receiver = path[i + 1];
        const NodeId via_child = path[i];
        RegistrationStep step;
        step.node = receiver;
        StoringTable& table = tables.at(receiver);
        if (installing) {
            step.applied = table.install(dest, via_child);
            step.table_full = !step.applied;
        } else {
            step.applied = table.remove(dest, via_child);
        }
        steps.push_back(step);
    }
    return steps;
}

}  // namespace

std::vector<RegistrationStep> storing_register(std::vector<StoringTable>& tables,
                                               std::span<const NodeId> path_child_to_root,
                                               NodeId dest,
                                               const std::vector<bool>& hop_delivered) {
    return walk_registration(tables, path_child_to_root, dest, hop_delivered, true);
}

std::vector<RegistrationStep> storing_deregister(std::vector<StoringTable>& tables,
                                                 std::span<const NodeId> path_child_to_root,
                                                 NodeId dest,
                                                 const std::vector<bool>& hop_delivered) {
    return walk_registration(tables, path_child_to_root, dest, hop_delivered, false);
}

std::optional<NodeId> RootTopologyView::parent(NodeId node) const {
    auto it = parent_of_.find(node);
    return it == parent_of_.end() ? std::nullopt : std::optional<NodeId>(it->second);
}

RootTopologyView::Update RootTopologyView::update(NodeId child, NodeId new_parent) {
    if (child == root_ || new_parent == child) return Update::Rejected;
    // Walk up from the proposed parent; hitting the child means the update
    // would close a cycle.
    NodeId cur = new_parent;
    std::size_t steps = 0;
    const std::size_t limit = parent_of_.size() + 2;
    while (cur != root_) {
        if (cur == child) return Update::Rejected;
        auto it = parent_of_.find(cur);
        if (it == parent_of_.end()) break;
        cur = it->second;
        if (++steps > limit) return Update::Rejected;  // invariant: chain is acyclic
    }
    parent_of_[child] = new_parent;
    ++version_;
    return Update::Accepted;
}

std::optional<std::vector<NodeId>> RootTopologyView::source_route(NodeId dest) const {
    if (dest == root_) return std::vector<NodeId>{};
    std::vector<NodeId> chain;
    NodeId cur = dest;
    while (cur != root_) {
        chain.push_back(cur);
        auto it = parent_of_.find(cur);
        if (it == parent_of_.end()) return std::nullopt;
        cur = it->second;
        if (chain.size() > parent_of_.size() + 1) return std::nullopt;
    }
    std::reverse(chain.begin(), chain.end());
    return chain;
}

int header_size(std::span<const NodeId> hops,
                const std::map<NodeId, LinkAddress>& addresses, NodeId root,
                bool prefix_shared) {
    if (hops.empty()) return 0;
    const LinkAddress& root_addr = addresses.at(root);
    std::size_t common = root_addr.size();
    for (const NodeId hop : hops) {
        const LinkAddress& addr = addresses.at(hop);
        std::size_t run = 0;
        while (run < common && addr[run] == root_addr[run]) ++run;
        common = run;
    }
    const int per_hop = static_cast<int>(root_addr.size() - common) +
                        (prefix_shared ? 0 : 8);
    return 6 + static_cast<int>(hops.size()) * per_hop;
}

std::optional<SourceRouteHeader> compute_source_route(
    const RootTopologyView& view, NodeId dest,
    const std::map<NodeId, LinkAddress>& addresses, bool prefix_shared) {
    auto hops = view.source_route(dest);
    if (!hops) return std::nullopt;
    SourceRouteHeader header;
    header.byte_size = header_size(*hops, addresses, view.root(), prefix_shared);
    header.hops = std::move(*hops);
    return header;
}

std::map<NodeId, LinkAddress> make_addresses(std::size_t node_count, bool heterogeneous,
                                             std::uint64_t seed) {
    std::map<NodeId, LinkAddress> addrs;
    Rng rng = Rng::stream(seed, 0xadd2);
    for (NodeId id = 0; id < node_count; ++id) {
        LinkAddress a{0x02, 0x12, 0x4b, 0x00, 0x00, 0x06, 0x00, 0x00};
        if (heterogeneous) {
            for (std::size_t i = 0; i < 6; ++i)
                a[i] = static_cast<std::uint8_t>(rng.below(256));
        }
        // Low byte first, so distinct ids diverge right after the fixed part
        // and the common run is exactly the 6 vendor bytes.
        a[6] = static_cast<std::uint8_t>(id & 0xff);
        a[7] = static_cast<std::uint8_t>(id >> 8);
        addrs.emplace(id, a);
    }
    return addrs;
}

namespace {

// True downward path root -> ... -> dest, or empty if dest has no parent
// chain reaching the root.
std::vector<NodeId> true_path(std::span<const std::optional<NodeId>> true_parent,
                              NodeId root, NodeId dest) {
    std::vector<NodeId> chain;
    NodeId cur = dest;
    while (cur != root) {
        chain.push_back(cur);
        const auto& p = true_parent[cur];
        if (!p || chain.size() > true_parent.size()) return {};
        cur = *p;
    }
    chain.push_back(root);
    std::reverse(chain.begin(), chain.end());
    return chain;
}

}  // namespace

ConsistencySnapshot snapshot_storing(const std::vector<StoringTable>& tables,
                                     std::span<const std::optional<NodeId>> true_parent,
                                     NodeId root, std::int64_t time_ms) {
    const std::size_t n = tables.size();
    ConsistencySnapshot snap;
    snap.time_ms = time_ms;
    snap.status.assign(n, NodeStatus::Unreachable);
    snap.status[root] = NodeStatus::Reachable;

    for (NodeId dest = 0; dest < n; ++dest) {
        if (dest == root) continue;

        // Zero-loss walk over the tables.
        bool walk_ok = false;
        {
            std::vector<char> visited(n, 0);
            NodeId cur = root;
            visited[cur] = 1;
            while (true) {
                if (cur == dest) {
                    walk_ok = true;
                    break;
                }
                const auto nh = tables[cur].next_hop(dest);
                if (!nh || visited[*nh]) break;  // discarded along the path
                cur = *nh;
                visited[cur] = 1;
            }
        }
        if (!walk_ok) continue;

        // Currency check against every node's state, not just on-path nodes.
        const std::vector<NodeId> path = true_path(true_parent, root, dest);
        bool outdated = path.empty();
        for (NodeId x = 0; x < n && !outdated; ++x) {
            if (x == dest) continue;
            const auto entry = tables[x].next_hop(dest);
            const auto on_path = std::find(path.begin(), path.end(), x);
            if (on_path != path.end() && *on_path != dest) {
                const NodeId expected = *(on_path + 1);
                if (!entry || *entry != expected) outdated = true;  // missing or stale
            } else if (entry) {
                outdated = true;  // stale entry off the true path
            }
        }
        snap.status[dest] = outdated ? NodeStatus::Outdated : NodeStatus::Reachable;
    }
    return snap;
}

ConsistencySnapshot snapshot_nonstoring(const RootTopologyView& view,
                                        std::span<const std::optional<NodeId>> true_parent,
                                        std::int64_t time_ms) {
    const std::size_t n = true_parent.size();
    ConsistencySnapshot snap;
    snap.time_ms = time_ms;
    snap.status.assign(n, NodeStatus::Unreachable);
    snap.status[view.root()] = NodeStatus::Reachable;

    for (NodeId dest = 0; dest < n; ++dest) {
        if (dest == view.root()) continue;
        const auto route = view.source_route(dest);
        if (!route) continue;  // no route in the root's view
        // The walk always delivers (the view is acyclic); the state is current
        // iff every believed parent edge along the chain matches reality.
        bool outdated = false;
        for (const NodeId hop : *route) {
            if (true_parent[hop] != view.parent(hop)) {
                outdated = true;
                break;
            }
        }
        snap.status[dest] = outdated ? NodeStatus::Outdated : NodeStatus::Reachable;
    }
    return snap;
}

}  // namespace rplmesh
