#include "rplmesh/engine.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <queue>
#include <unordered_map>

#include "rplmesh/link_estimator.hpp"
#include "rplmesh/mac.hpp"
#include "rplmesh/metrics.hpp"
#include "rplmesh/routing.hpp"
#include "rplmesh/rng.hpp"

namespace rplmesh {

namespace {

constexpr std::uint64_t kNoJourney = std::numeric_limits<std::uint64_t>::max();
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Frame {
    enum class Kind { Data, Probe, Dio, DaoReg, DaoNoPath };
    std::uint64_t id = 0;
    Kind kind = Kind::Data;
    NodeId holder = 0;    // node whose queue the frame sits in
    NodeId next_hop = 0;  // unicast destination of the next transmission
    std::optional<int> seqno;

    // Data
    NodeId src = 0;
    NodeId dst = 0;
    bool going_down = false;
    std::vector<NodeId> remaining_hops;  // non-storing downward leg
    int hops_used = 0;
    std::uint64_t journey = kNoJourney;
    bool counted = false;

    // Registration payloads
    NodeId reg_dest = 0;    // the registering node
    NodeId reg_parent = 0;  // its parent (non-storing payload)
    NodeId via = 0;         // forwarding child (storing install/remove key)

    // Beacons and probes advertise the sender's rank
    double advertised_rank = kInf;
};

struct Event {
    std::int64_t time = 0;
    std::uint64_t order = 0;
    enum class Kind { Dio, Probe, Dao, Traffic, TxComplete, Snapshot, Saturation } kind;
    NodeId node = 0;
    std::uint64_t frame = 0;
    bool delivered = false;
    int attempts = 0;
};

struct EventLater {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) return a.time > b.time;
        return a.order > b.order;
    }
};

struct SimNode {
    SimNode(NodeId id_, const ScenarioConfig& cfg, std::uint64_t master_seed)
        : id(id_),
          table(id_, cfg.estimator),
          routes(id_, cfg.routes_capacity),
          dup(cfg.mac.dup_mode, cfg.mac.naive_ring_size, cfg.mac.seq_lifetime_ms),
          queue(cfg.mac.queue_capacity),
          rng(Rng::stream(master_seed, 1000 + id_)) {}

    NodeId id;
    NeighborTable table;
    double rank = kInf;
    std::optional<NodeId> parent;
    StoringTable routes;
    DuplicateDetector dup;
    MacQueue queue;
    bool radio_busy = false;
    int next_seq = 0;  // 8-bit, wraps at 256
    Rng rng;
    std::uint64_t switches = 0;

    // Time-weighted queue depth for the saturation guard.
    std::int64_t q_last_change_ms = 0;
    double q_depth_integral = 0.0;
};

class Engine {
  public:
    Engine(const ScenarioConfig& cfg, const Topology& topo)
        : cfg_(cfg),
          topo_(topo),
          view_(topo.root()),
          traffic_rng_(Rng::stream(cfg.seed, 1)),
          duration_ms_(cfg.duration_s * 1000),
          warmup_ms_(cfg.warmup_s * 1000) {
        probe_mac_ = cfg_.mac;
        probe_mac_.retries_r = cfg_.probe_retries >= 0 ? cfg_.probe_retries : cfg_.retries_r;
    }

    RunReport execute();

  private:
    // --- setup -----------------------------------------------------------
    void schedule_initial_events();

    // --- event dispatch ---------------------------------------------------
    void on_dio_timer(NodeId node);
    void on_probe_timer(NodeId node);
    void on_dao_timer(NodeId node);
    void on_traffic_timer(NodeId source);
    void on_tx_complete(const Event& ev);
    void on_snapshot_timer();
    void on_saturation_timer();

    // --- frame plumbing ----------------------------------------------------
    std::uint64_t new_frame(Frame::Kind kind, NodeId holder);
    void assign_seqno(Frame& f);
    void enqueue_frame(std::uint64_t frame_id);
    void service_queue(NodeId node);
    void route_data(std::uint64_t frame_id);
    void forward_registration(std::uint64_t frame_id, NodeId at);

    // --- receptions ---------------------------------------------------------
    void receive_unicast(std::uint64_t frame_id, std::int64_t now);
    void handle_beacon(NodeId receiver, NodeId sender, double advertised_rank,
                       std::optional<int> seqno, bool is_broadcast);

    // --- routing updates ----------------------------------------------------
    void run_parent_selection(NodeId node);
    void refresh_rank(NodeId node);
    void send_registration(NodeId node);
    void send_probe(NodeId node, NodeId target);

    // --- packet terminals ----------------------------------------------------
    void terminal_delivered(Frame& f);
    void terminal_lost(Frame& f, LossCause cause);

    // --- helpers ---------------------------------------------------------------
    void push_event(Event ev) {
        ev.order = next_order_++;
        events_.push(ev);
    }
    std::int64_t jittered(double period_s, Rng& rng) const {
        const double ms = period_s * 1000.0 * (0.9 + 0.2 * rng.uniform());
        return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::llround(ms)));
    }
    bool within_run(std::int64_t t) const { return t < duration_ms_; }
    void note_queue_change(SimNode& n, std::size_t depth_before);
    std::vector<std::optional<NodeId>> true_parents() const;
    void finish_report(RunReport& report);

    const ScenarioConfig& cfg_;
    const Topology& topo_;
    RootTopologyView view_;
    MacConfig probe_mac_;
    std::map<NodeId, LinkAddress> addresses_;

    std::vector<SimNode> nodes_;
    std::unordered_map<std::uint64_t, Frame> frames_;
    std::priority_queue<Event, std::vector<Event>, EventLater> events_;
    std::uint64_t next_order_ = 0;
    std::uint64_t next_frame_id_ = 0;

    Rng traffic_rng_;
    std::vector<NodeId> traffic_sources_;
    std::int64_t now_ = 0;
    std::int64_t duration_ms_;
    std::int64_t warmup_ms_;

    // Counted statistics (post-warmup packets).
    std::uint64_t packets_generated_ = 0;
    std::uint64_t counted_sent_ = 0;
    std::uint64_t counted_delivered_ = 0;
    std::array<std::uint64_t, kLossCauseCount> losses_{};
    std::vector<PacketJourney> journeys_;
    std::uint64_t control_drops_ = 0;
    std::uint64_t dao_rejects_ = 0;
    bool saturated_ = false;

    std::vector<ConsistencySnapshot> snapshots_;
    std::vector<double> up_prr_samples_;
    std::vector<double> down_prr_samples_;
    std::vector<double> staleness_samples_s_;
    std::vector<double> header_bytes_samples_;
    std::int64_t last_saturation_check_ms_ = 0;
};

// --------------------------------------------------------------------------

RunReport Engine::execute() {
    const std::size_t n = topo_.node_count();
    nodes_.reserve(n);
    for (NodeId id = 0; id < n; ++id) nodes_.emplace_back(id, cfg_, cfg_.seed);
    nodes_[topo_.root()].rank = cfg_.metric.root_rank();
    addresses_ = make_addresses(n, cfg_.heterogeneous_addresses, cfg_.seed);

    schedule_initial_events();

    while (!events_.empty()) {
        const Event ev = events_.top();
        events_.pop();
        now_ = ev.time;
        switch (ev.kind) {
            case Event::Kind::Dio: on_dio_timer(ev.node); break;
            case Event::Kind::Probe: on_probe_timer(ev.node); break;
            case Event::Kind::Dao: on_dao_timer(ev.node); break;
            case Event::Kind::Traffic: on_traffic_timer(ev.node); break;
            case Event::Kind::TxComplete: on_tx_complete(ev); break;
            case Event::Kind::Snapshot: on_snapshot_timer(); break;
            case Event::Kind::Saturation: on_saturation_timer(); break;
        }
    }

    RunReport report;
    finish_report(report);
    return report;
}

void Engine::schedule_initial_events() {
    for (SimNode& node : nodes_) {
        push_event({jittered(cfg_.dio_period_s, node.rng), 0, Event::Kind::Dio, node.id});
        if (cfg_.probing)
            push_event(
                {jittered(cfg_.probe_period_s, node.rng), 0, Event::Kind::Probe, node.id});
        push_event({jittered(cfg_.dao_period_s, node.rng), 0, Event::Kind::Dao, node.id});
    }

    if (cfg_.traffic_pattern == TrafficPattern::Downward) {
        traffic_sources_ = {topo_.root()};
        const double interval_s = 1.0 / cfg_.rate_hz;
        push_event({jittered(interval_s, traffic_rng_), 0, Event::Kind::Traffic,
                    topo_.root()});
    } else {
        const std::size_t count = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(cfg_.any_to_any_source_fraction *
                                                     static_cast<double>(nodes_.size()))));
        std::vector<NodeId> pool(nodes_.size());
        for (NodeId id = 0; id < nodes_.size(); ++id) pool[id] = id;
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t pick = i + traffic_rng_.below(pool.size() - i);
            std::swap(pool[i], pool[pick]);
            traffic_sources_.push_back(pool[i]);
        }
        std::sort(traffic_sources_.begin(), traffic_sources_.end());
        for (const NodeId src : traffic_sources_) {
            push_event({jittered(cfg_.any_to_any_interval_s, traffic_rng_), 0,
                        Event::Kind::Traffic, src});
        }
    }

    const std::int64_t snap_ms =
        std::max<std::int64_t>(1, static_cast<std::int64_t>(cfg_.snapshot_period_s * 1000));
    push_event({warmup_ms_ > 0 ? warmup_ms_ : snap_ms, 0, Event::Kind::Snapshot, 0});
    push_event({60'000, 0, Event::Kind::Saturation, 0});
}

// --- timers -----------------------------------------------------------------

void Engine::on_dio_timer(NodeId node) {
    SimNode& n = nodes_[node];
    const std::uint64_t fid = new_frame(Frame::Kind::Dio, node);
    Frame& f = frames_[fid];
    f.advertised_rank = n.rank;
    // Sequence numbers are suppressed on broadcasts in enhanced mode only.
    if (cfg_.mac.dup_mode == DupMode::Naive) assign_seqno(f);
    enqueue_frame(fid);

    const std::int64_t next = now_ + jittered(cfg_.dio_period_s, n.rng);
    if (within_run(next)) push_event({next, 0, Event::Kind::Dio, node});
}

void Engine::on_probe_timer(NodeId node) {
    SimNode& n = nodes_[node];
    n.table.decay_freshness(now_);
    const auto target = n.table.select_probe_target(
        n.rng.coin(), [this](const NeighborEntry& e) {
            return cfg_.metric.rank_through_etx(e.advertised_rank, e.etx_estimate);
        });
    if (target) send_probe(node, *target);

    const std::int64_t next = now_ + jittered(cfg_.probe_period_s, n.rng);
    if (within_run(next)) push_event({next, 0, Event::Kind::Probe, node});
}

void Engine::on_dao_timer(NodeId node) {
    if (node != topo_.root() && nodes_[node].parent) send_registration(node);
    const std::int64_t next = now_ + jittered(cfg_.dao_period_s, nodes_[node].rng);
    if (within_run(next)) push_event({next, 0, Event::Kind::Dao, node});
}

void Engine::on_traffic_timer(NodeId source) {
    // Destination: uniform over the other nodes (downward traffic never
    // targets the root itself).
    NodeId dst;
    if (cfg_.traffic_pattern == TrafficPattern::Downward) {
        NodeId pick = static_cast<NodeId>(traffic_rng_.below(nodes_.size() - 1));
        dst = pick >= topo_.root() ? static_cast<NodeId>(pick + 1) : pick;
    } else {
        NodeId pick = static_cast<NodeId>(traffic_rng_.below(nodes_.size() - 1));
        dst = pick >= source ? static_cast<NodeId>(pick + 1) : pick;
    }

    const std::uint64_t fid = new_frame(Frame::Kind::Data, source);
    Frame& f = frames_[fid];
    f.src = source;
    f.dst = dst;
    f.counted = now_ >= warmup_ms_;
    ++packets_generated_;
    if (f.counted) {
        ++counted_sent_;
        f.journey = journeys_.size();
        PacketJourney j;
        j.packet_id = packets_generated_ - 1;
        j.src = source;
        j.dst = dst;
        j.send_time_ms = now_;
        journeys_.push_back(std::move(j));
    }
    route_data(fid);

    const double interval_s = cfg_.traffic_pattern == TrafficPattern::Downward
                                  ? 1.0 / cfg_.rate_hz
                                  : cfg_.any_to_any_interval_s;
    const std::int64_t next = now_ + jittered(interval_s, traffic_rng_);
    if (within_run(next)) push_event({next, 0, Event::Kind::Traffic, source});
}

void Engine::on_snapshot_timer() {
    const auto parents = true_parents();
    ConsistencySnapshot snap =
        cfg_.mode == RoutingMode::Storing
            ? [&] {
                  std::vector<StoringTable> tables;
                  tables.reserve(nodes_.size());
                  for (const SimNode& n : nodes_) tables.push_back(n.routes);
                  return snapshot_storing(tables, parents, topo_.root(), now_);
              }()
            : snapshot_nonstoring(view_, parents, now_);
    snapshots_.push_back(std::move(snap));

    for (const SimNode& n : nodes_) {
        if (!n.parent) continue;
        up_prr_samples_.push_back(topo_.prr_at(n.id, *n.parent, now_));
        down_prr_samples_.push_back(topo_.prr_at(*n.parent, n.id, now_));
        if (const NeighborEntry* e = n.table.find(*n.parent)) {
            staleness_samples_s_.push_back(
                static_cast<double>(now_ - e->last_update_ms) / 1000.0);
        }
    }

    const std::int64_t next =
        now_ + std::max<std::int64_t>(
                   1, static_cast<std::int64_t>(cfg_.snapshot_period_s * 1000));
    if (within_run(next)) push_event({next, 0, Event::Kind::Snapshot, 0});
}

void Engine::on_saturation_timer() {
    const std::int64_t window = now_ - last_saturation_check_ms_;
    for (SimNode& n : nodes_) {
        note_queue_change(n, n.queue.size());  // flush the integral to now
        const double mean_depth = n.q_depth_integral / static_cast<double>(window);
        if (mean_depth > 0.8 * static_cast<double>(cfg_.mac.queue_capacity))
            saturated_ = true;
        n.q_depth_integral = 0.0;
    }
    last_saturation_check_ms_ = now_;
    const std::int64_t next = now_ + 60'000;
    if (within_run(next)) push_event({next, 0, Event::Kind::Saturation, 0});
}

// --- frame plumbing -----------------------------------------------------------

std::uint64_t Engine::new_frame(Frame::Kind kind, NodeId holder) {
    Frame f;
    f.id = next_frame_id_++;
    f.kind = kind;
    f.holder = holder;
    const std::uint64_t id = f.id;
    frames_.emplace(id, std::move(f));
    return id;
}

void Engine::assign_seqno(Frame& f) {
    SimNode& n = nodes_[f.holder];
    f.seqno = n.next_seq;
    n.next_seq = (n.next_seq + 1) % 256;
}

void Engine::note_queue_change(SimNode& n, std::size_t depth_before) {
    n.q_depth_integral +=
        static_cast<double>(depth_before) * static_cast<double>(now_ - n.q_last_change_ms);
    n.q_last_change_ms = now_;
}

void Engine::enqueue_frame(std::uint64_t frame_id) {
    Frame& f = frames_[frame_id];
    SimNode& n = nodes_[f.holder];
    note_queue_change(n, n.queue.size());
    if (n.queue.enqueue(frame_id) == EnqueueResult::QueueOverflow) {
        if (f.kind == Frame::Kind::Data) {
            terminal_lost(f, LossCause::QueueOverflow);
        } else {
            ++control_drops_;
            frames_.erase(frame_id);
        }
        return;
    }
    service_queue(n.id);
}

void Engine::service_queue(NodeId node) {
    SimNode& n = nodes_[node];
    if (n.radio_busy || n.queue.empty()) return;
    note_queue_change(n, n.queue.size());
    const std::uint64_t fid = n.queue.dequeue();
    Frame& f = frames_[fid];
    n.radio_busy = true;

    if (f.kind == Frame::Kind::Dio) {
        // Broadcasts are sent once, no retries, no ACK.
        push_event({now_ + cfg_.mac.per_attempt_delay_ms, 0, Event::Kind::TxComplete,
                    node, fid, false, 1});
        return;
    }

    if (!f.seqno) assign_seqno(f);
    const double prr = topo_.prr_at(node, f.next_hop, now_);
    const MacConfig& mac = f.kind == Frame::Kind::Probe ? probe_mac_ : cfg_.mac;
    const TxOutcome outcome = transmit(prr, mac, n.rng);
    push_event({now_ + outcome.attempts_used * cfg_.mac.per_attempt_delay_ms, 0,
                Event::Kind::TxComplete, node, fid, outcome.delivered,
                outcome.attempts_used});
}

void Engine::on_tx_complete(const Event& ev) {
    SimNode& sender = nodes_[ev.node];
    sender.radio_busy = false;
    const auto frame_it = frames_.find(ev.frame);
    if (frame_it == frames_.end()) {
        service_queue(ev.node);
        return;
    }
    Frame& f = frame_it->second;

    if (f.kind == Frame::Kind::Dio) {
        // Fan-out: sample reception independently per out-neighbor.
        const double advertised = f.advertised_rank;
        const auto seqno = f.seqno;
        for (const NodeId nb : topo_.neighbors_out(ev.node)) {
            if (!sender.rng.bernoulli(topo_.prr_at(ev.node, nb, now_))) continue;
            handle_beacon(nb, ev.node, advertised, seqno, /*is_broadcast=*/true);
        }
        frames_.erase(ev.frame);
        service_queue(ev.node);
        return;
    }

    // Unicast: transmission feedback drives the sender's link estimate.
    sender.table.observe(f.next_hop, topo_.rssi(ev.node, f.next_hop), now_);
    sender.table.update_on_tx(f.next_hop, ev.attempts, ev.delivered, now_);
    run_parent_selection(ev.node);

    if (f.kind == Frame::Kind::Data && f.journey != kNoJourney) {
        journeys_[f.journey].hops.push_back(
            {ev.node, f.next_hop, ev.attempts, ev.delivered});
    }

    if (!ev.delivered) {
        if (f.kind == Frame::Kind::Data) {
            terminal_lost(f, LossCause::MacDrop);
        } else {
            frames_.erase(ev.frame);  // lost control message; timers retry
        }
    } else {
        receive_unicast(ev.frame, now_);
    }
    service_queue(ev.node);
}

void Engine::receive_unicast(std::uint64_t frame_id, std::int64_t now) {
    Frame& f = frames_[frame_id];
    const NodeId receiver = f.next_hop;
    const NodeId sender = f.holder;
    SimNode& rx = nodes_[receiver];

    if (rx.dup.check(sender, f.seqno, false, now) == DupVerdict::DropDuplicate) {
        // The ACK went out, so the sender saw a success; the packet itself
        // dies here. Our Bernoulli MAC never re-presents a genuinely
        // delivered frame, so every such drop is spurious.
        if (f.kind == Frame::Kind::Data) {
            terminal_lost(f, LossCause::SpuriousDuplicate);
        } else {
            frames_.erase(frame_id);
        }
        return;
    }

    switch (f.kind) {
        case Frame::Kind::Data: {
            f.holder = receiver;
            f.seqno.reset();  // each hop is a new MAC frame
            ++f.hops_used;
            if (receiver == f.dst) {
                terminal_delivered(f);
            } else {
                route_data(frame_id);
            }
            break;
        }
        case Frame::Kind::Probe: {
            handle_beacon(receiver, sender, f.advertised_rank, std::nullopt, false);
            frames_.erase(frame_id);
            break;
        }
        case Frame::Kind::DaoReg:
        case Frame::Kind::DaoNoPath: {
            forward_registration(frame_id, receiver);
            break;
        }
        case Frame::Kind::Dio: break;  // unreachable
    }
}

void Engine::handle_beacon(NodeId receiver, NodeId sender, double advertised_rank,
                           std::optional<int> seqno, bool is_broadcast) {
    SimNode& rx = nodes_[receiver];
    if (rx.dup.check(sender, seqno, is_broadcast, now_) == DupVerdict::DropDuplicate)
        return;
    rx.table.observe(sender, topo_.rssi(sender, receiver), now_);
    rx.table.note_advertised_rank(sender, advertised_rank);
    if (NeighborEntry* e = rx.table.find(sender))
        e->is_potential_parent = advertised_rank < rx.rank;
    if (receiver != topo_.root()) run_parent_selection(receiver);
}

// --- routing ---------------------------------------------------------------------

void Engine::route_data(std::uint64_t frame_id) {
    Frame& f = frames_[frame_id];
    const NodeId at = f.holder;
    SimNode& n = nodes_[at];

    if (f.hops_used >= cfg_.hop_limit) {
        // A forwarding loop is a routing-state inconsistency.
        terminal_lost(f, LossCause::RouteNotFound);
        return;
    }

    if (cfg_.mode == RoutingMode::NonStoring) {
        if (f.going_down) {
            if (f.remaining_hops.empty()) {
                terminal_lost(f, LossCause::RouteNotFound);
                return;
            }
            f.next_hop = f.remaining_hops.front();
            f.remaining_hops.erase(f.remaining_hops.begin());
        } else if (at == topo_.root()) {
            auto route = view_.source_route(f.dst);
            if (!route || route->empty()) {
                terminal_lost(f, LossCause::RouteNotFound);
                return;
            }
            if (f.counted)
                header_bytes_samples_.push_back(static_cast<double>(
                    header_size(*route, addresses_, topo_.root())));
            f.going_down = true;
            f.remaining_hops = std::move(*route);
            f.next_hop = f.remaining_hops.front();
            f.remaining_hops.erase(f.remaining_hops.begin());
        } else if (n.parent) {
            f.next_hop = *n.parent;
        } else {
            terminal_lost(f, LossCause::RouteNotFound);
            return;
        }
    } else {
        const LookupResult lr =
            storing_lookup(n.routes, f.dst, n.parent, !f.going_down);
        if (lr.action == LookupResult::Action::NoRoute) {
            terminal_lost(f, LossCause::RouteNotFound);
            return;
        }
        if (lr.action == LookupResult::Action::Down) f.going_down = true;
        f.next_hop = lr.next_hop;
    }
    enqueue_frame(frame_id);
}

void Engine::forward_registration(std::uint64_t frame_id, NodeId at) {
    Frame& f = frames_[frame_id];
    SimNode& n = nodes_[at];

    if (cfg_.mode == RoutingMode::Storing) {
        if (f.kind == Frame::Kind::DaoReg) {
            n.routes.install(f.reg_dest, f.via);  // full table: not installed, counted
        } else {
            n.routes.remove(f.reg_dest, f.via);
        }
    }

    if (at == topo_.root()) {
        if (cfg_.mode == RoutingMode::NonStoring && f.kind == Frame::Kind::DaoReg) {
            if (view_.update(f.reg_dest, f.reg_parent) == RootTopologyView::Update::Rejected)
                ++dao_rejects_;  // the child's periodic re-registration retries
        }
        frames_.erase(frame_id);
        return;
    }
    // Transient parent cycles (stale advertised ranks) must not circulate
    // control messages forever; the periodic re-registration retries.
    if (!n.parent || ++f.hops_used >= cfg_.hop_limit) {
        if (f.hops_used >= cfg_.hop_limit) ++control_drops_;
        frames_.erase(frame_id);
        return;
    }
    f.holder = at;
    f.via = at;
    f.next_hop = *n.parent;
    f.seqno.reset();  // new MAC frame on the next hop
    enqueue_frame(frame_id);
}

void Engine::run_parent_selection(NodeId node) {
    if (node == topo_.root()) return;
    SimNode& n = nodes_[node];

    std::vector<ParentCandidate> candidates;
    candidates.reserve(n.table.entries().size());
    for (const auto& [id, e] : n.table.entries()) {
        if (!std::isfinite(e.advertised_rank)) continue;
        candidates.push_back(
            {id, e.advertised_rank,
             cfg_.metric.rank_through_etx(e.advertised_rank, e.etx_estimate)});
    }
    const auto choice = select_parent(candidates, n.parent, cfg_.hysteresis);

    if (choice != n.parent) {
        const auto old_parent = n.parent;
        if (old_parent && cfg_.mode == RoutingMode::Storing) {
            // De-register the old route before announcing the new one.
            const std::uint64_t fid = new_frame(Frame::Kind::DaoNoPath, node);
            Frame& f = frames_[fid];
            f.reg_dest = node;
            f.via = node;
            f.next_hop = *old_parent;
            enqueue_frame(fid);
        }
        n.parent = choice;
        n.table.set_preferred_parent(choice);
        if (old_parent && now_ >= warmup_ms_) ++n.switches;
        refresh_rank(node);
        if (choice) {
            send_registration(node);
            n.table.decay_freshness(now_);  // freshness must be current here
            if (cfg_.probing && n.table.schedule_immediate_probe(*choice))
                send_probe(node, *choice);
        }
    } else {
        refresh_rank(node);
    }
}

void Engine::refresh_rank(NodeId node) {
    SimNode& n = nodes_[node];
    double rank = kInf;
    if (n.parent) {
        if (const NeighborEntry* e = n.table.find(*n.parent))
            rank = cfg_.metric.rank_through_etx(e->advertised_rank, e->etx_estimate);
    }
    if (rank == n.rank) return;
    n.rank = rank;
    n.table.refresh_potential_parents(rank);
}

void Engine::send_registration(NodeId node) {
    SimNode& n = nodes_[node];
    if (!n.parent) return;
    const std::uint64_t fid = new_frame(Frame::Kind::DaoReg, node);
    Frame& f = frames_[fid];
    f.reg_dest = node;
    f.reg_parent = *n.parent;
    f.via = node;
    f.next_hop = *n.parent;
    enqueue_frame(fid);
}

void Engine::send_probe(NodeId node, NodeId target) {
    const std::uint64_t fid = new_frame(Frame::Kind::Probe, node);
    Frame& f = frames_[fid];
    f.next_hop = target;
    f.advertised_rank = nodes_[node].rank;
    enqueue_frame(fid);
}

// --- terminals ----------------------------------------------------------------

void Engine::terminal_delivered(Frame& f) {
    if (f.counted) {
        ++counted_delivered_;
        PacketJourney& j = journeys_[f.journey];
        j.delivered = true;
        j.end_time_ms = now_;
    }
    frames_.erase(f.id);
}

void Engine::terminal_lost(Frame& f, LossCause cause) {
    if (f.counted) {
        ++losses_[static_cast<std::size_t>(cause)];
        PacketJourney& j = journeys_[f.journey];
        j.delivered = false;
        j.cause = cause;
        j.end_time_ms = now_;
    }
    frames_.erase(f.id);
}

// --- reporting ---------------------------------------------------------------

std::vector<std::optional<NodeId>> Engine::true_parents() const {
    std::vector<std::optional<NodeId>> parents(nodes_.size());
    for (const SimNode& n : nodes_) parents[n.id] = n.parent;
    return parents;
}

void Engine::finish_report(RunReport& report) {
    report.packets_sent = counted_sent_;
    report.delivered = counted_delivered_;
    report.losses_by_cause = losses_;
    assert(report.packets_sent == report.delivered + report.total_losses());

    std::vector<double> latencies, hops;
    for (const PacketJourney& j : journeys_) {
        if (!j.delivered) continue;
        latencies.push_back(static_cast<double>(j.latency_ms()));
        hops.push_back(static_cast<double>(j.delivered_hop_count()));
    }
    report.latency_ms = DistributionSummary::of(std::move(latencies));
    report.hop_count = DistributionSummary::of(std::move(hops));
    report.up_link_prr = DistributionSummary::of(up_prr_samples_);
    report.down_link_prr = DistributionSummary::of(down_prr_samples_);
    report.parent_staleness_s = DistributionSummary::of(staleness_samples_s_);
    report.header_bytes = DistributionSummary::of(header_bytes_samples_);

    // Final radius: deepest node over the true parent chains.
    const auto parents = true_parents();
    int radius = 0;
    for (NodeId id = 0; id < nodes_.size(); ++id) {
        int depth = 0;
        NodeId cur = id;
        std::size_t steps = 0;
        while (cur != topo_.root() && parents[cur] && steps++ <= nodes_.size()) {
            cur = *parents[cur];
            ++depth;
        }
        if (cur == topo_.root()) radius = std::max(radius, depth);
    }
    report.radius_hops = radius;

    std::uint64_t switches = 0;
    for (const SimNode& n : nodes_) switches += n.switches;
    report.parent_switches = switches;
    const double node_hours = static_cast<double>(nodes_.size()) *
                              static_cast<double>(duration_ms_ - warmup_ms_) / 3.6e6;
    report.switches_per_node_hour =
        node_hours > 0 ? static_cast<double>(switches) / node_hours : 0.0;
    report.control_drops = control_drops_;
    report.dao_rejects = dao_rejects_;
    report.saturated = saturated_;

    report.consistency = snapshots_;
    for (const auto& snap : snapshots_) {
        for (std::size_t id = 0; id < snap.status.size(); ++id) {
            if (id == topo_.root()) continue;
            ++report.consistency_totals[std::string(node_status_label(snap.status[id]))];
        }
    }

    report.journeys = journeys_;
    report.journeys_recorded = cfg_.emit_journeys;

    report.scenario["mode"] =
        cfg_.mode == RoutingMode::Storing ? "storing" : "nonstoring";
    report.scenario["metric"] = cfg_.metric.label();
    report.scenario["probing"] = cfg_.probing ? "true" : "false";
    report.scenario["dup_mode"] =
        cfg_.mac.dup_mode == DupMode::Naive ? "naive" : "enhanced";
    report.scenario["retries_r"] = std::to_string(cfg_.retries_r);
    report.scenario["traffic_pattern"] =
        cfg_.traffic_pattern == TrafficPattern::Downward ? "downward" : "any_to_any";
    report.scenario["rate_hz"] = std::to_string(cfg_.rate_hz);
    report.scenario["payload_bytes"] = std::to_string(cfg_.payload_bytes);
    report.scenario["duration_s"] = std::to_string(cfg_.duration_s);
    report.scenario["warmup_s"] = std::to_string(cfg_.warmup_s);
    report.scenario["seed"] = std::to_string(cfg_.seed);
    report.scenario["node_count"] = std::to_string(topo_.node_count());
}

}  // namespace

RunReport run(const ScenarioConfig& cfg, const Topology& topo) {
    cfg.validate();
    Engine engine(cfg, topo);
    return engine.execute();
}

RunReport run(const ScenarioConfig& cfg) {
    const Topology topo = build_topology(cfg);
    return run(cfg, topo);
}

}  // namespace rplmesh
