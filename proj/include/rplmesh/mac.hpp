/*
 * Abstract MAC layer: per-attempt Bernoulli transmission with a bounded retry
 * budget, bounded FIFO queues, duplicate detection (naive legacy mode and the
 * enhanced per-neighbor mode), and ACK sender-address disambiguation.
 */
#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "rplmesh/rng.hpp"
#include "rplmesh/types.hpp"

namespace rplmesh {

enum class DupMode { Naive, Enhanced };

struct MacConfig {
    int retries_r = 8;                     // retries after the first attempt
    std::size_t queue_capacity = 24;
    DupMode dup_mode = DupMode::Enhanced;
    std::int64_t seq_lifetime_ms = 30'000;  // enhanced mode only
    std::int64_t per_attempt_delay_ms = 40;
    std::size_t naive_ring_size = 8;
};

struct TxOutcome {
    bool delivered = false;
    int attempts_used = 0;  // in [1, 1+R]; == 1+R when not delivered
};

// Independent Bernoulli(prr) attempts, stopping at the first success or after
// 1+R attempts. Drop probability is (1-prr)^(1+R).
TxOutcome transmit(double prr, const MacConfig& config, Rng& rng);

enum class EnqueueResult { Ok, QueueOverflow };

// Bounded FIFO of frame handles. Overflow is a counted terminal loss for the
// packet concerned, never an exception.
class MacQueue {
  public:
    explicit MacQueue(std::size_t capacity = 24) : capacity_(capacity) {}

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return frames_.size(); }
    bool empty() const { return frames_.empty(); }

    EnqueueResult enqueue(std::uint64_t frame);
    std::uint64_t dequeue();

  private:
    std::size_t capacity_;
    std::deque<std::uint64_t> frames_;
};

enum class DupVerdict { Accept, DropDuplicate };

// Receiver-side duplicate detection.
//
// Naive: one bounded ring of recent (sender, seqno) pairs per receiving node;
// a match drops the frame regardless of age, which makes wrapped 8-bit
// sequence numbers produce spurious drops.
//
// Enhanced: broadcasts carry no sequence number and are always accepted;
// unicast keeps only the last sequence number per neighbor and expires it
// after seq_lifetime_ms.
class DuplicateDetector {
  public:
    explicit DuplicateDetector(DupMode mode, std::size_t naive_ring_size = 8,
                               std::int64_t seq_lifetime_ms = 30'000)
        : mode_(mode), ring_size_(naive_ring_size), lifetime_ms_(seq_lifetime_ms) {}

    DupVerdict check(NodeId sender, std::optional<int> seqno, bool is_broadcast,
                     std::int64_t now_ms);

  private:
    DupMode mode_;
    std::size_t ring_size_;
    std::int64_t lifetime_ms_;
    std::deque<std::pair<NodeId, int>> ring_;                      // naive
    std::map<NodeId, std::pair<int, std::int64_t>> last_by_peer_;  // enhanced
};

inline constexpr int kAckAddressOverheadBytes = 8;

struct AckResolution {
    // believes_acked[i] corresponds to concurrent_senders[i]; the frame that
    // was actually received is the first sender's.
    std::vector<bool> believes_acked;
    int false_positives = 0;
    int ack_overhead_bytes = 0;
};

// Two (or more) senders transmitted the same seqno in the same slot. With the
// sender address option each sender matches only its own ACK; without it,
// every sender treats the ACK as its own.
AckResolution ack_disambiguation(std::span<const NodeId> concurrent_senders,
                                 bool ack_carries_sender_addr);

}  // namespace rplmesh
