#include "rplmesh/trace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

namespace rplmesh {

namespace {

bool parse_int(const std::string& tok, long long& out) {
    if (tok.empty()) return false;
    std::size_t pos = 0;
    try {
        out = std::stoll(tok, &pos);
    } catch (const std::exception&) {
        return false;
    }
    return pos == tok.size();
}

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> toks;
    std::istringstream iss(line);
    std::string t;
    while (iss >> t) toks.push_back(t);
    return toks;
}

NodeId to_node_id(long long v, std::size_t line_no) {
    if (v < 0 || v > 0xFFFF) throw TraceParseError("node id out of range", line_no);
    return static_cast<NodeId>(v);
}

}  // namespace

std::vector<TraceEvent> parse_trace(std::istream& in) {
    std::vector<TraceEvent> events;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto toks = tokenize(line);
        if (toks.empty() || toks[0][0] == '#') continue;
        TraceEvent ev;
        long long v = 0;
        if (toks[0] == "TX") {
            if (toks.size() != 4) throw TraceParseError("TX expects 3 fields", line_no);
            ev.kind = TraceEvent::Kind::Tx;
            if (!parse_int(toks[1], v) || v < 0) throw TraceParseError("bad time", line_no);
            ev.time_ms = v;
            if (!parse_int(toks[2], v)) throw TraceParseError("bad sender", line_no);
            ev.sender = to_node_id(v, line_no);
            if (!parse_int(toks[3], v)) throw TraceParseError("bad seqno", line_no);
            ev.seqno = static_cast<int>(v);
        } else if (toks[0] == "RX") {
            if (toks.size() != 5 && toks.size() != 6)
                throw TraceParseError("RX expects 4 or 5 fields", line_no);
            ev.kind = TraceEvent::Kind::Rx;
            if (!parse_int(toks[1], v) || v < 0) throw TraceParseError("bad time", line_no);
            ev.time_ms = v;
            if (!parse_int(toks[2], v)) throw TraceParseError("bad sender", line_no);
            ev.sender = to_node_id(v, line_no);
            if (!parse_int(toks[3], v)) throw TraceParseError("bad receiver", line_no);
            ev.receiver = to_node_id(v, line_no);
            if (ev.receiver == ev.sender)
                throw TraceParseError("receiver equals sender", line_no);
            if (!parse_int(toks[4], v)) throw TraceParseError("bad seqno", line_no);
            ev.seqno = static_cast<int>(v);
            if (toks.size() == 6) {
                if (!parse_int(toks[5], v)) throw TraceParseError("bad rssi", line_no);
                ev.rssi_dbm = static_cast<int>(v);
            }
        } else {
            throw TraceParseError("unknown record '" + toks[0] + "'", line_no);
        }
        events.push_back(ev);
    }
    return events;
}

std::vector<TraceEvent> parse_trace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace file: " + path);
    return parse_trace(in);
}

namespace {

Topology build_topology(const std::vector<TraceEvent>& events, std::int64_t window_ms,
                        NodeId root) {
    if (window_ms <= 0) throw std::invalid_argument("window_ms must be positive");

    std::set<std::tuple<std::int64_t, NodeId, int>> tx_index;
    std::size_t max_id = root;
    for (const auto& ev : events) {
        max_id = std::max<std::size_t>(max_id, ev.sender);
        if (ev.kind == TraceEvent::Kind::Tx) {
            tx_index.insert({ev.time_ms, ev.sender, ev.seqno});
        } else {
            max_id = std::max<std::size_t>(max_id, ev.receiver);
        }
    }
    std::set<std::tuple<std::int64_t, NodeId, int, NodeId>> rx_seen;
    for (const auto& ev : events) {
        if (ev.kind != TraceEvent::Kind::Rx) continue;
        if (!tx_index.count({ev.time_ms, ev.sender, ev.seqno})) {
            throw TraceValidationError("RX without matching TX (sender " +
                                       std::to_string(ev.sender) + ", seqno " +
                                       std::to_string(ev.seqno) + ", t=" +
                                       std::to_string(ev.time_ms) + "ms)");
        }
        // A receiver cannot hear one transmission twice; duplicates would
        // push the windowed ratio past 1.
        if (!rx_seen.insert({ev.time_ms, ev.sender, ev.seqno, ev.receiver}).second) {
            throw TraceValidationError("duplicate RX (sender " +
                                       std::to_string(ev.sender) + " to " +
                                       std::to_string(ev.receiver) + ", seqno " +
                                       std::to_string(ev.seqno) + ", t=" +
                                       std::to_string(ev.time_ms) + "ms)");
        }
    }

    // Per window: TX count per sender, RX count per ordered pair.
    std::map<std::pair<std::int64_t, NodeId>, long long> tx_count;
    std::map<std::pair<std::int64_t, std::pair<NodeId, NodeId>>, long long> rx_count;
    std::set<std::pair<NodeId, NodeId>> heard_pairs;
    std::map<std::pair<NodeId, NodeId>, int> last_rssi;
    for (const auto& ev : events) {
        const std::int64_t w = ev.time_ms / window_ms;
        if (ev.kind == TraceEvent::Kind::Tx) {
            ++tx_count[{w, ev.sender}];
        } else {
            const std::pair<NodeId, NodeId> pair{ev.sender, ev.receiver};
            ++rx_count[{w, pair}];
            heard_pairs.insert(pair);
            if (ev.rssi_dbm) last_rssi[pair] = *ev.rssi_dbm;
        }
    }

    Topology topo(max_id + 1, root);
    for (const auto& pair : heard_pairs) {
        DirectionalLink& l = topo.link_or_create(pair.first, pair.second);
        for (const auto& [key, txs] : tx_count) {
            if (key.second != pair.first) continue;
            auto rx_it = rx_count.find({key.first, pair});
            const long long rxs = rx_it == rx_count.end() ? 0 : rx_it->second;
            l.prr_series.push_back({key.first * window_ms,
                                    static_cast<double>(rxs) / static_cast<double>(txs)});
        }
        auto rssi_it = last_rssi.find(pair);
        if (rssi_it != last_rssi.end()) l.rssi_dbm = rssi_it->second;
    }
    return topo;
}

}  // namespace

Topology load_trace(std::istream& in, std::int64_t window_ms, NodeId root) {
    return build_topology(parse_trace(in), window_ms, root);
}

Topology load_trace(const std::string& path, std::int64_t window_ms, NodeId root) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace file: " + path);
    return load_trace(in, window_ms, root);
}

namespace {

// Smallest denominator q <= limit with (double)(p*q rounded)/q == p.
std::pair<long long, long long> exact_fraction(double p, long long limit) {
    for (long long q = 1; q <= limit; ++q) {
        const long long num = std::llround(p * static_cast<double>(q));
        if (num < 0 || num > q) continue;
        if (static_cast<double>(num) / static_cast<double>(q) == p) return {num, q};
    }
    throw std::runtime_error("PRR sample is not a small rational; cannot serialize trace");
}

}  // namespace

void save_trace(const Topology& topo, std::ostream& out, std::int64_t window_ms) {
    // Group samples by (window, src); every dst sample in a group must be
    // realizable against one shared TX count.
    struct DstSample {
        NodeId dst;
        long long num, den;
        std::optional<int> rssi;
    };
    std::map<std::pair<std::int64_t, NodeId>, std::vector<DstSample>> groups;
    for (const auto& [key, l] : topo.links()) {
        for (const auto& s : l.prr_series) {
            if (s.time_ms % window_ms != 0)
                throw std::runtime_error("sample not aligned to a window start");
            auto [num, den] = exact_fraction(s.prr, 10'000);
            groups[{s.time_ms / window_ms, key.first}].push_back(
                {key.second, num, den, l.rssi_dbm});
        }
    }
    out << "# trace serialized from topology (window " << window_ms << " ms)\n";
    // Nodes with no link activity still need to appear so that reloading
    // infers the same node count; a lone TX creates no samples.
    std::vector<char> mentioned(topo.node_count(), 0);
    for (const auto& [key, dsts] : groups) {
        mentioned[key.second] = 1;
        for (const auto& d : dsts) mentioned[d.dst] = 1;
    }
    for (NodeId id = 0; id < topo.node_count(); ++id) {
        if (!mentioned[id]) out << "TX 0 " << id << " 0\n";
    }
    for (const auto& [key, dsts] : groups) {
        const std::int64_t t = key.first * window_ms;
        const NodeId src = key.second;
        long long txs = 1;
        for (const auto& d : dsts) {
            txs = std::lcm(txs, d.den);
            if (txs > (1LL << 20))
                throw std::runtime_error("TX count exploded while serializing trace");
        }
        for (long long seq = 0; seq < txs; ++seq)
            out << "TX " << t << ' ' << src << ' ' << seq << '\n';
        for (const auto& d : dsts) {
            const long long rxs = d.num * (txs / d.den);
            for (long long seq = 0; seq < rxs; ++seq) {
                out << "RX " << t << ' ' << src << ' ' << d.dst << ' ' << seq;
                if (d.rssi) out << ' ' << *d.rssi;
                out << '\n';
            }
        }
    }
}

void save_trace(const Topology& topo, const std::string& path, std::int64_t window_ms) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    save_trace(topo, out, window_ms);
}

}  // namespace rplmesh
