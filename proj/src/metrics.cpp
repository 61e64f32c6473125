#include "rplmesh/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rplmesh {

Metric Metric::etxn(double n) {
    if (n < 1.0) throw std::invalid_argument("exponent n must be >= 1");
    return {MetricKind::EtxN, n, 0};
}

Metric Metric::lr(int r) {
    if (r < 0) throw std::invalid_argument("retries must be >= 0");
    return {MetricKind::Lr, 1.0, r};
}

Metric Metric::parse(const std::string& text, int default_retries) {
    if (text == "etx") return etx();
    if (text == "lr") return lr(default_retries);
    if (text.rfind("etxn", 0) == 0) {
        double n = 2.0;
        if (text.size() > 4) {
            if (text[4] != ':') throw std::invalid_argument("bad metric: " + text);
            n = std::stod(text.substr(5));
        }
        return etxn(n);
    }
    throw std::invalid_argument("bad metric: " + text);
}

std::string Metric::label() const {
    switch (kind) {
        case MetricKind::Etx: return "etx";
        case MetricKind::EtxN: {
            std::string n = std::to_string(exponent_n);
            n.erase(n.find_last_not_of('0') + 1);
            if (!n.empty() && n.back() == '.') n.pop_back();
            return "etxn:" + n;
        }
        case MetricKind::Lr: return "lr";
    }
    return "?";
}

namespace {

void require_prr(double prr) {
    if (!(prr >= 0.0 && prr <= 1.0))
        throw std::invalid_argument("prr must be in [0,1]");
}

}  // namespace

double rank_etxn(double parent_rank, double prr, double n) {
    require_prr(prr);
    if (prr == 0.0) return std::numeric_limits<double>::infinity();
    return parent_rank + std::pow(1.0 / prr, n);
}

double rank_lr(double parent_lr, double prr, int r) {
    if (!(parent_lr >= 0.0 && parent_lr <= 1.0))
        throw std::invalid_argument("parent_lr must be in [0,1]");
    return 1.0 - (1.0 - parent_lr) * hop_success(prr, r);
}

double hop_success(double prr, int r) {
    require_prr(prr);
    return 1.0 - std::pow(1.0 - prr, static_cast<double>(1 + r));
}

double path_delivery(std::span<const double> prrs, int r) {
    double pdr = 1.0;
    for (double prr : prrs) pdr *= hop_success(prr, r);
    return pdr;
}

double path_delivery_down(std::span<const double> down_prrs, int r) {
    return path_delivery(down_prrs, r);
}

double Metric::rank_through_prr(double parent_rank, double prr) const {
    switch (kind) {
        case MetricKind::Etx: return rank_etxn(parent_rank, prr, 1.0);
        case MetricKind::EtxN: return rank_etxn(parent_rank, prr, exponent_n);
        case MetricKind::Lr: return rank_lr(parent_rank, prr, retries_r);
    }
    return std::numeric_limits<double>::infinity();
}

double Metric::rank_through_etx(double parent_rank, double etx_estimate) const {
    switch (kind) {
        case MetricKind::Etx: return parent_rank + etx_estimate;
        case MetricKind::EtxN: return parent_rank + std::pow(etx_estimate, exponent_n);
        case MetricKind::Lr: return rank_lr(parent_rank, 1.0 / etx_estimate, retries_r);
    }
    return std::numeric_limits<double>::infinity();
}

std::optional<NodeId> select_parent(std::span<const ParentCandidate> candidates,
                                    std::optional<NodeId> current, double hysteresis) {
    // Our current rank is the (recomputed) rank through the current parent;
    // a joining node has rank +inf and accepts any candidate.
    double own_rank = std::numeric_limits<double>::infinity();
    const ParentCandidate* current_candidate = nullptr;
    if (current) {
        for (const auto& c : candidates) {
            if (c.id == *current && std::isfinite(c.would_be_rank)) {
                current_candidate = &c;
                own_rank = c.would_be_rank;
                break;
            }
        }
    }

    const ParentCandidate* best = nullptr;
    for (const auto& c : candidates) {
        if (!std::isfinite(c.would_be_rank)) continue;
        if (c.advertised_rank >= own_rank) continue;  // would create a loop
        if (!best || c.would_be_rank < best->would_be_rank ||
            (c.would_be_rank == best->would_be_rank && c.id < best->id)) {
            best = &c;
        }
    }

    if (!current_candidate) {
        // No current parent (or its link died): forced move to the best
        // candidate if one exists.
        return best ? std::optional<NodeId>(best->id) : std::nullopt;
    }
    if (best && best->id != *current &&
        own_rank - best->would_be_rank > hysteresis) {
        return best->id;
    }
    return current;
}

}  // namespace rplmesh
