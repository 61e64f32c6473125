/*
 * Gradient metrics and end-to-end delivery math.
 *
 * Three rank definitions, all "lower is better":
 *   ETX      rank(n) = rank(parent) + 1/PRR,          root = 1
 *   ETX^N    rank(n) = rank(parent) + (1/PRR)^N,      root = 1
 *   LR       rank(n) = 1 - (1-rank(parent)) * (1-(1-PRR)^(1+R)),  root = 0
 *
 * Per-hop success with R retries is 1-(1-PRR)^(1+R); the end-to-end delivery
 * ratio of a path is the product of its per-hop successes, which makes the LR
 * rank of a node exactly 1 minus its analytic path delivery ratio.
 */
#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rplmesh/types.hpp"

namespace rplmesh {

enum class MetricKind { Etx, EtxN, Lr };

struct Metric {
    MetricKind kind = MetricKind::Etx;
    double exponent_n = 1.0;  // EtxN only; real exponents >= 1 supported
    int retries_r = 8;        // Lr only

    static Metric etx() { return {MetricKind::Etx, 1.0, 0}; }
    static Metric etxn(double n);
    static Metric lr(int r);

    // "etx", "etxn:<n>" or "lr"; throws std::invalid_argument otherwise.
    static Metric parse(const std::string& text, int default_retries = 8);

    double root_rank() const { return kind == MetricKind::Lr ? 0.0 : 1.0; }

    // Rank through a parent given the true/estimated PRR of the uplink.
    double rank_through_prr(double parent_rank, double prr) const;

    // Rank through a parent given the EWMA ETX estimate of the uplink (the
    // estimator natively tracks ETX; PRR is recovered as 1/ETX for LR).
    double rank_through_etx(double parent_rank, double etx_estimate) const;

    std::string label() const;
};

// (parent_rank + (1/prr)^n); prr must be > 0. n=1 is classic ETX.
double rank_etxn(double parent_rank, double prr, double n);

// Exact LR recursion; monotone in both arguments.
double rank_lr(double parent_lr, double prr, int r);

// P(at least one of 1+r attempts succeeds).
double hop_success(double prr, int r);

// Product of per-hop successes over an ordered list of per-hop PRRs.
// The empty path (node is the root) delivers with probability 1.
double path_delivery(std::span<const double> prrs, int r);

// Same formula evaluated on parent->child PRRs along the downward path.
double path_delivery_down(std::span<const double> down_prrs, int r);

struct ParentCandidate {
    NodeId id = 0;
    double advertised_rank = 0.0;  // the candidate's own advertised rank
    double would_be_rank = 0.0;    // our rank if we selected this candidate
};

// MRHOF-style selection: keep the current parent unless the best candidate
// improves the would-be rank by more than `hysteresis`. Candidates whose
// advertised rank is not below our current rank are rejected (loop guard);
// ties break to the lowest id. Returns nullopt iff no usable candidate.
std::optional<NodeId> select_parent(std::span<const ParentCandidate> candidates,
                                    std::optional<NodeId> current, double hysteresis);

}  // namespace rplmesh
