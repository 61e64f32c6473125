/*
 * Acceptance suite: one check per shipped guarantee, one PASS/FAIL line each.
 * Runs under ctest; exits nonzero if any criterion fails.
 */
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rplmesh/engine.hpp"
#include "rplmesh/mac.hpp"
#include "rplmesh/metrics.hpp"
#include "rplmesh/replay.hpp"
#include "rplmesh/report.hpp"
#include "rplmesh/routing.hpp"
#include "rplmesh/rng.hpp"

using namespace rplmesh;

namespace {

int g_failures = 0;

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

void criterion(int number, const std::string& name, double budget_s,
               const std::function<void(Check&)>& body) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
        body(check);
    } catch (const std::exception& e) {
        check.require(false, std::string("exception: ") + e.what());
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    check.require(elapsed < budget_s, "runtime " + std::to_string(elapsed) +
                                          "s exceeds budget " + std::to_string(budget_s) + "s");
    if (check.ok) {
        std::printf("PASS  %d. %s (%.2fs)\n", number, name.c_str(), elapsed);
    } else {
        std::printf("FAIL  %d. %s (%.2fs): %s\n", number, name.c_str(), elapsed,
                    check.detail.c_str());
        ++g_failures;
    }
    std::fflush(stdout);
}

ScenarioConfig config_from(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

// ---------------------------------------------------------------------------

void c1_formula_oracle(Check& check) {
    const std::vector<double> one{0.5};
    const std::vector<double> two{0.5, 0.5};
    check.require(path_delivery(one, 1) == 0.75, "1-hop PDR != 0.75");
    check.require(path_delivery(two, 1) == 0.5625, "2-hop PDR != 0.5625");
}

void c2_lr_pdr_identity(Check& check) {
    std::mt19937_64 gen(1234);
    std::uniform_real_distribution<double> prr_dist(0.01, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int hops = 1 + static_cast<int>(gen() % 10);
        for (const int r : {0, 1, 8}) {
            std::vector<double> prrs;
            double lr = 0.0;
            for (int h = 0; h < hops; ++h) {
                prrs.push_back(prr_dist(gen));
                lr = rank_lr(lr, prrs.back(), r);
            }
            worst = std::max(worst, std::abs(lr - (1.0 - path_delivery(prrs, r))));
        }
    }
    check.require(worst < 1e-12, "identity error " + std::to_string(worst));
}

void c3_monte_carlo(Check& check) {
    // transmit()-level simulation of a 3-hop path vs the closed formula.
    const std::vector<double> prrs{0.7, 0.5, 0.9};
    MacConfig mac;  // R = 8
    Rng rng(909);
    const int trials = 1'000'000;
    int delivered = 0;
    for (int t = 0; t < trials; ++t) {
        bool ok = true;
        for (const double prr : prrs) {
            if (!transmit(prr, mac, rng).delivered) {
                ok = false;
                break;
            }
        }
        if (ok) ++delivered;
    }
    const double analytic = path_delivery(prrs, mac.retries_r);
    const double empirical = static_cast<double>(delivered) / trials;
    const double sigma = std::sqrt(analytic * (1.0 - analytic) / trials);
    check.require(std::abs(empirical - analytic) <= 3.0 * sigma,
                  "empirical " + std::to_string(empirical) + " vs analytic " +
                      std::to_string(analytic));
}

void c4_metric_direction(Check& check) {
    SynthParams params;
    params.asymmetry_sigma = 0.15;
    const Topology topo = generate_synthetic(50, 1, params);  // fixture seed
    const std::vector<Metric> metrics{Metric::etx(), Metric::etxn(2.0), Metric::lr(8)};
    const auto results = replay_metric_study(topo, metrics, 8);
    const auto& etx = results[0];
    const auto& etx2 = results[1];
    const auto& lr = results[2];
    check.require(etx2.min_up_prr >= etx.min_up_prr,
                  "ETX^2 worst uplink below ETX's");
    check.require(etx2.min_down_prr >= etx.min_down_prr,
                  "ETX^2 worst downlink below ETX's");
    check.require(lr.median_up_pdr >= etx.median_up_pdr &&
                      lr.median_up_pdr >= etx2.median_up_pdr,
                  "LR median up-PDR not the highest");
}

void c5_consistency(Check& check) {
    const std::size_t n = 50;
    std::mt19937_64 gen(777);  // deterministic fixture seed
    std::uniform_real_distribution<double> u(0.0, 1.0);

    std::vector<StoringTable> tables;
    for (NodeId id = 0; id < n; ++id) tables.emplace_back(id, 64);
    RootTopologyView view(0);
    std::vector<std::optional<NodeId>> parents(n);

    const auto chain_from = [&](NodeId start) {
        std::vector<NodeId> path{start};
        NodeId cur = start;
        while (cur != 0 && parents[cur]) {
            cur = *parents[cur];
            path.push_back(cur);
        }
        return path;
    };

    // Convergence: a clean registration wave in both modes.
    for (NodeId id = 1; id < n; ++id) {
        parents[id] = static_cast<NodeId>(gen() % id);
        view.update(id, *parents[id]);
        const auto path = chain_from(id);
        storing_register(tables, path, id, std::vector<bool>(path.size() - 1, true));
    }

    bool ns_unreachable = false, st_outdated = false, st_unreachable = false;
    int applied = 0;
    while (applied < 1000) {
        const NodeId child = 1 + static_cast<NodeId>(gen() % (n - 1));
        const NodeId candidate = static_cast<NodeId>(gen() % n);
        // Keep the true topology acyclic: reject descendants and self.
        if (candidate == child) continue;
        bool cyclic = false;
        for (NodeId cur = candidate; cur != 0;) {
            if (cur == child) {
                cyclic = true;
                break;
            }
            if (!parents[cur]) break;
            cur = *parents[cur];
        }
        if (cyclic) continue;
        ++applied;

        // Shared loss pattern: each registration message hop delivers with
        // probability 0.9.
        const auto old_path = chain_from(child);
        std::vector<bool> dereg_ok(old_path.size() - 1);
        for (auto&& o : dereg_ok) o = u(gen) >= 0.10;
        storing_deregister(tables, old_path, child, dereg_ok);

        parents[child] = candidate;
        const auto new_path = chain_from(child);
        std::vector<bool> reg_ok(new_path.size() - 1);
        bool end_to_end = true;
        for (auto&& o : reg_ok) {
            const bool delivered = u(gen) >= 0.10;
            o = delivered;
            end_to_end = end_to_end && delivered;
        }
        storing_register(tables, new_path, child, reg_ok);
        // Non-storing: the same message reaches the root iff every hop worked.
        if (end_to_end) view.update(child, candidate);

        const auto ns = snapshot_nonstoring(view, parents, applied);
        const auto st = snapshot_storing(tables, parents, 0, applied);
        for (NodeId id = 1; id < n; ++id) {
            if (ns.status[id] == NodeStatus::Unreachable) ns_unreachable = true;
            if (st.status[id] == NodeStatus::Outdated) st_outdated = true;
            if (st.status[id] == NodeStatus::Unreachable) st_unreachable = true;
        }
    }
    check.require(!ns_unreachable, "non-storing produced an UNREACHABLE snapshot");
    check.require(st_outdated, "storing produced no OUTDATED snapshot");
    check.require(st_unreachable, "storing produced no UNREACHABLE snapshot");
}

void c6_duplicate_elimination(Check& check) {
    // The wrap stream: node A sends seq 0 to B, 255 frames elsewhere (one
    // frame every 250 ms), then seq 0 to B again -- plus a randomized tail of
    // the same shape. Identical stream through both detectors.
    struct Rx {
        int seqno;
        std::int64_t t;
    };
    // Canonical wrap: B hears seq 0, then none of the next 255 frames (all
    // unicast elsewhere), then the 256th frame -- seq 0 again, 64 s later.
    std::vector<Rx> stream{{0, 0}, {0, 256 * 250}};
    // Randomized tail of the same traffic shape, identical for both modes.
    Rng rng(6);
    int seq = 0;
    std::int64_t t = 256 * 250;
    for (int i = 0; i < 4000; ++i) {
        seq = (seq + 1) % 256;
        t += 250;
        if (rng.below(64) == 0) stream.push_back({seq, t});
    }

    DuplicateDetector naive(DupMode::Naive, 8, 30'000);
    DuplicateDetector enhanced(DupMode::Enhanced, 8, 30'000);
    int naive_drops = 0, enhanced_drops = 0;
    for (const auto& rx : stream) {
        if (naive.check(1, rx.seqno, false, rx.t) == DupVerdict::DropDuplicate)
            ++naive_drops;
        if (enhanced.check(1, rx.seqno, false, rx.t) == DupVerdict::DropDuplicate)
            ++enhanced_drops;
    }
    check.require(naive_drops >= 1, "naive mode saw no spurious duplicate");
    check.require(enhanced_drops == 0,
                  "enhanced mode dropped " + std::to_string(enhanced_drops));

    // Same seqno again 31 s later: expired, accepted.
    DuplicateDetector expiry(DupMode::Enhanced, 8, 30'000);
    expiry.check(2, 9, false, 0);
    check.require(expiry.check(2, 9, false, 31'000) == DupVerdict::Accept,
                  "31s-apart same seqno not accepted under enhanced");
}

void c7_rule_of_three(Check& check) {
    check.require(rule_of_three(500'000, 0) == 6e-6, "bound != 6e-6");
    check.require(rule_of_three(3, 0) == 1.0, "3/3 != 1.0");
    check.require(rule_of_three(1000, 2) == 2e-3, "observed rate != 2e-3");
}

void c8_header_size(Check& check) {
    const auto homo = make_addresses(8, false);
    check.require(header_size(std::vector<NodeId>{1, 2, 3}, homo, 0) == 12,
                  "homogeneous 3-hop header != 12");
    std::map<NodeId, LinkAddress> hetero;
    hetero[0] = {0x11, 0x22, 0x33, 0x44, 0x55, 0x66, 0x77, 0x88};
    hetero[1] = {0x99, 0x01, 0x02, 0x03, 0x04, 0x05, 0x06, 0x07};
    hetero[2] = {0xaa, 0xbb, 0xcc, 0xdd, 0xee, 0xff, 0x10, 0x20};
    hetero[3] = {0x31, 0x41, 0x59, 0x26, 0x53, 0x58, 0x97, 0x93};
    check.require(header_size(std::vector<NodeId>{1, 2, 3}, hetero, 0) == 30,
                  "heterogeneous 3-hop header != 30");
}

void c9_conservation_determinism(Check& check) {
    const std::string scenario =
        "node_count = 50\n"
        "asymmetry_sigma = 0.15\n"
        "mode = nonstoring\n"
        "metric = etxn\n"
        "exponent_n = 2\n"
        "rate_hz = 4\n"
        "duration_s = 600\n"
        "warmup_s = 300\n"
        "emit_journeys = true\n";
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        ScenarioConfig cfg = config_from(scenario + "seed = " + std::to_string(seed) + "\n");
        const RunReport a = run(cfg);
        check.require(a.packets_sent == a.delivered + a.total_losses(),
                      "conservation violated at seed " + std::to_string(seed));
        const RunReport b = run(cfg);
        const auto bytes = [](const RunReport& r) {
            return r.to_json() + r.causes_csv() + r.consistency_csv() + r.journeys_csv();
        };
        check.require(bytes(a) == bytes(b),
                      "reports differ for seed " + std::to_string(seed));
        if (!check.ok) return;
    }
}

}  // namespace

int main() {
    criterion(1, "analytic delivery matches the quoted 75%/56% points", 1.0,
              c1_formula_oracle);
    criterion(2, "LR rank equals 1 - path delivery on random paths", 5.0,
              c2_lr_pdr_identity);
    criterion(3, "transmit-level Monte Carlo matches the closed formula", 60.0,
              c3_monte_carlo);
    criterion(4, "ETX^2 lifts worst selected links, LR maximizes delivery", 120.0,
              c4_metric_direction);
    criterion(5, "non-storing stays reachable; lossy storing goes inconsistent", 60.0,
              c5_consistency);
    criterion(6, "sequence wrap drops vanish with enhanced duplicate detection", 5.0,
              c6_duplicate_elimination);
    criterion(7, "rule of three bounds zero-loss runs", 1.0, c7_rule_of_three);
    criterion(8, "source-route header sizes hit the compression bounds", 1.0,
              c8_header_size);
    criterion(9, "10-seed sweep conserves packets with byte-identical reruns", 600.0,
              c9_conservation_determinism);

    if (g_failures == 0) {
        std::printf("all acceptance criteria passed\n");
        return 0;
    }
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
}
