#include "rplmesh/mac.hpp"

#include <algorithm>
#include <stdexcept>

namespace rplmesh {

TxOutcome transmit(double prr, const MacConfig& config, Rng& rng) {
    if (prr < 0.0 || prr > 1.0) throw std::invalid_argument("prr must be in [0,1]");
    const int max_attempts = 1 + config.retries_r;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        if (rng.bernoulli(prr)) return {true, attempt};
    }
    return {false, max_attempts};
}

EnqueueResult MacQueue::enqueue(std::uint64_t frame) {
    if (frames_.size() >= capacity_) return EnqueueResult::QueueOverflow;
    frames_.push_back(frame);
    return EnqueueResult::Ok;
}

std::uint64_t MacQueue::dequeue() {
    if (frames_.empty()) throw std::logic_error("dequeue on empty queue");
    const std::uint64_t f = frames_.front();
    frames_.pop_front();
    return f;
}

DupVerdict DuplicateDetector::check(NodeId sender, std::optional<int> seqno,
                                    bool is_broadcast, std::int64_t now_ms) {
    if (mode_ == DupMode::Naive) {
        if (!seqno) return DupVerdict::Accept;
        const std::pair<NodeId, int> key{sender, *seqno};
        if (std::find(ring_.begin(), ring_.end(), key) != ring_.end())
            return DupVerdict::DropDuplicate;
        ring_.push_back(key);
        if (ring_.size() > ring_size_) ring_.pop_front();
        return DupVerdict::Accept;
    }

    // Enhanced: sequence numbers are suppressed on broadcasts.
    if (is_broadcast || !seqno) return DupVerdict::Accept;
    auto it = last_by_peer_.find(sender);
    if (it != last_by_peer_.end() && it->second.first == *seqno &&
        now_ms - it->second.second <= lifetime_ms_) {
        return DupVerdict::DropDuplicate;
    }
    last_by_peer_[sender] = {*seqno, now_ms};
    return DupVerdict::Accept;
}

AckResolution ack_disambiguation(std::span<const NodeId> concurrent_senders,
                                 bool ack_carries_sender_addr) {
    AckResolution res;
    res.believes_acked.resize(concurrent_senders.size());
    res.ack_overhead_bytes = ack_carries_sender_addr ? kAckAddressOverheadBytes : 0;
    for (std::size_t i = 0; i < concurrent_senders.size(); ++i) {
        if (ack_carries_sender_addr) {
            res.believes_acked[i] = (i == 0);  // only the received frame's sender
        } else {
            res.believes_acked[i] = true;
            if (i != 0) ++res.false_positives;
        }
    }
    return res;
}

}  // namespace rplmesh
