#include <doctest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "rplmesh/engine.hpp"
#include "rplmesh/report.hpp"

using namespace rplmesh;

namespace {

ScenarioConfig config_from(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

std::string serialize(const RunReport& r) {
    return r.to_json() + r.causes_csv() + r.consistency_csv() + r.journeys_csv();
}

}  // namespace

TEST_CASE("a perfect 2-node link delivers every packet") {
    ScenarioConfig cfg = config_from(
        "trace_path = " + fixture_path("two_node_perfect.trace") + "\n" +
        "mode = nonstoring\n"
        "rate_hz = 2\n"
        "duration_s = 120\n"
        "warmup_s = 40\n"
        "seed = 3\n");
    const RunReport report = run(cfg);
    CHECK(report.packets_sent > 100);
    CHECK(report.delivered == report.packets_sent);
    CHECK(report.total_losses() == 0);
    CHECK(report.loss_rate() == 0.0);
    // With zero losses the report carries the rule-of-three bound.
    CHECK(report.to_json().find("loss_rate_bound_95") != std::string::npos);
}

TEST_CASE("identical config and seed give byte-identical reports") {
    ScenarioConfig cfg = config_from(
        "node_count = 20\n"
        "asymmetry_sigma = 0.1\n"
        "mode = nonstoring\n"
        "rate_hz = 4\n"
        "duration_s = 240\n"
        "warmup_s = 60\n"
        "emit_journeys = true\n"
        "seed = 11\n");
    const RunReport a = run(cfg);
    const RunReport b = run(cfg);
    CHECK(serialize(a) == serialize(b));

    ScenarioConfig other = cfg;
    other.seed = 12;
    const RunReport c = run(other);
    CHECK(serialize(a) != serialize(c));
}

TEST_CASE("packet conservation holds in both modes on a lossy network") {
    for (const char* mode : {"storing", "nonstoring"}) {
        ScenarioConfig cfg = config_from(
            std::string("mode = ") + mode + "\n" +
            "node_count = 30\n"
            "asymmetry_sigma = 0.2\n"
            "rate_hz = 4\n"
            "duration_s = 300\n"
            "warmup_s = 60\n"
            "seed = 21\n");
        const RunReport report = run(cfg);
        CHECK(report.packets_sent > 0);
        CHECK(report.packets_sent == report.delivered + report.total_losses());
    }
}

TEST_CASE("warmup packets never appear in the statistics") {
    ScenarioConfig cfg = config_from(
        "trace_path = " + fixture_path("two_node_perfect.trace") + "\n" +
        "rate_hz = 4\n"
        "duration_s = 60\n"
        "warmup_s = 30\n"
        "seed = 5\n");
    const RunReport report = run(cfg);
    CHECK(report.packets_sent > 0);
    for (const auto& j : report.journeys) CHECK(j.send_time_ms >= 30'000);
    // Roughly half the generated traffic is excluded.
    CHECK(report.packets_sent < 200);
}

TEST_CASE("delivered latency is at least hops times the attempt delay") {
    ScenarioConfig cfg = config_from(
        "node_count = 25\n"
        "asymmetry_sigma = 0.1\n"
        "rate_hz = 2\n"
        "duration_s = 300\n"
        "warmup_s = 120\n"
        "seed = 8\n");
    const RunReport report = run(cfg);
    int delivered_seen = 0;
    for (const auto& j : report.journeys) {
        if (!j.delivered) continue;
        ++delivered_seen;
        CHECK(j.latency_ms() >= j.delivered_hop_count() * cfg.mac.per_attempt_delay_ms);
        CHECK(j.delivered_hop_count() >= 1);
        CHECK(j.hops.back().to == j.dst);
    }
    CHECK(delivered_seen > 0);
}

TEST_CASE("every lost packet carries exactly one terminal cause") {
    ScenarioConfig cfg = config_from(
        "node_count = 30\n"
        "asymmetry_sigma = 0.25\n"
        "mode = storing\n"
        "rate_hz = 4\n"
        "duration_s = 240\n"
        "warmup_s = 60\n"
        "seed = 31\n");
    const RunReport report = run(cfg);
    std::uint64_t lost_journeys = 0;
    for (const auto& j : report.journeys) {
        if (j.delivered) {
            CHECK_FALSE(j.cause.has_value());
        } else {
            CHECK(j.cause.has_value());
            ++lost_journeys;
        }
    }
    CHECK(lost_journeys == report.total_losses());
}

TEST_CASE("probing keeps the preferred parent estimate at least as fresh") {
    const std::string base =
        "node_count = 25\n"
        "asymmetry_sigma = 0.1\n"
        "rate_hz = 1\n"
        "duration_s = 900\n"
        "warmup_s = 300\n"
        "seed = 13\n";
    ScenarioConfig with = config_from(base + "probing = true\n");
    ScenarioConfig without = config_from(base + "probing = false\n");
    const RunReport on = run(with);
    const RunReport off = run(without);
    REQUIRE(on.parent_staleness_s.count > 0);
    REQUIRE(off.parent_staleness_s.count > 0);
    CHECK(on.parent_staleness_s.max <= off.parent_staleness_s.max);
    CHECK(on.parent_staleness_s.mean <= off.parent_staleness_s.mean);
}

TEST_CASE("a tiny queue under heavy load saturates and counts overflows") {
    ScenarioConfig cfg = config_from(
        "node_count = 15\n"
        "asymmetry_sigma = 0.3\n"
        "rate_hz = 40\n"
        "max_rate_hz = 50\n"
        "queue_capacity = 8\n"
        "duration_s = 180\n"
        "warmup_s = 30\n"
        "seed = 17\n");
    const RunReport report = run(cfg);
    CHECK(report.saturated);
    CHECK(report.losses_by_cause[static_cast<int>(LossCause::QueueOverflow)] > 0);
    CHECK(report.packets_sent == report.delivered + report.total_losses());
}

TEST_CASE("the wrap scenario spuriously drops under naive detection only") {
    // Crafted so a forwarding node's 8-bit sequence counter wraps between
    // consecutive receptions at the same receiver: slow beacons, long-lived
    // rings, sustained downward traffic.
    const std::string base =
        "node_count = 50\n"
        "asymmetry_sigma = 0.15\n"
        "rate_hz = 4\n"
        "duration_s = 3600\n"
        "warmup_s = 300\n"
        "dio_period_s = 60\n"
        "seed = 2\n";
    ScenarioConfig naive = config_from(base + "dup_mode = naive\n");
    ScenarioConfig enhanced = config_from(base + "dup_mode = enhanced\n");
    const RunReport bad = run(naive);
    const RunReport good = run(enhanced);
    CHECK(bad.losses_by_cause[static_cast<int>(LossCause::SpuriousDuplicate)] >= 1);
    CHECK(good.losses_by_cause[static_cast<int>(LossCause::SpuriousDuplicate)] == 0);
}

TEST_CASE("any-to-any traffic routes between arbitrary pairs") {
    ScenarioConfig cfg = config_from(
        "node_count = 25\n"
        "asymmetry_sigma = 0.1\n"
        "traffic_pattern = any_to_any\n"
        "any_to_any_interval_s = 5\n"
        "duration_s = 600\n"
        "warmup_s = 120\n"
        "mode = storing\n"
        "seed = 19\n");
    const RunReport report = run(cfg);
    CHECK(report.packets_sent > 0);
    CHECK(report.packets_sent == report.delivered + report.total_losses());
    bool non_root_src = false;
    for (const auto& j : report.journeys)
        if (j.src != 0) non_root_src = true;
    CHECK(non_root_src);
}

TEST_CASE("end-to-end delivery through the full stack matches the closed formula") {
    // Fixed line root-1-2 with every hop at PRR 0.35: the engine's queues,
    // forwarding, retries and estimator together must reproduce the analytic
    // per-destination delivery 1-(1-prr)^(1+R) per hop.
    ScenarioConfig cfg = config_from(
        "trace_path = " + fixture_path("line3_weak.trace") + "\n" +
        "mode = nonstoring\n"
        "rate_hz = 4\n"
        "duration_s = 1500\n"
        "warmup_s = 120\n"
        "seed = 12\n");
    const RunReport report = run(cfg);

    const double hop = 1.0 - std::pow(1.0 - 0.35, 9.0);
    double expected = 0.0, variance = 0.0;
    std::uint64_t population = 0, delivered = 0;
    for (const auto& j : report.journeys) {
        // Only packets that actually rode the MAC belong to the binomial
        // population; routing-state misses are a different process.
        if (!j.delivered && j.cause != LossCause::MacDrop) continue;
        const double p = j.dst == 1 ? hop : hop * hop;
        expected += p;
        variance += p * (1.0 - p);
        ++population;
        if (j.delivered) ++delivered;
    }
    REQUIRE(population > 2000);
    const double sigma = std::sqrt(variance);
    CHECK(std::abs(static_cast<double>(delivered) - expected) <= 3.0 * sigma);
}

TEST_CASE("the lr metric runs live without hanging on transient loops") {
    // Live LR is known to loop transiently (its rank saturates near 1 and is
    // very sensitive to estimate noise); the run must terminate, conserve
    // packets, and recover routes rather than wedge control traffic.
    ScenarioConfig cfg = config_from(
        "node_count = 30\n"
        "asymmetry_sigma = 0.15\n"
        "mode = nonstoring\n"
        "metric = lr\n"
        "hysteresis = 0.02\n"
        "rate_hz = 4\n"
        "duration_s = 600\n"
        "warmup_s = 120\n"
        "seed = 4\n");
    const RunReport report = run(cfg);
    CHECK(report.packets_sent > 0);
    CHECK(report.packets_sent == report.delivered + report.total_losses());
    CHECK(report.delivered > report.packets_sent / 2);
}

TEST_CASE("non-storing runs account source-route header sizes") {
    const std::string base =
        "node_count = 30\n"
        "asymmetry_sigma = 0.1\n"
        "mode = nonstoring\n"
        "rate_hz = 4\n"
        "duration_s = 300\n"
        "warmup_s = 60\n"
        "seed = 6\n";
    ScenarioConfig homo = config_from(base);
    const RunReport a = run(homo);
    REQUIRE(a.header_bytes.count > 0);
    // Homogeneous address plan: 6 fixed bytes + 2 per hop, at least one hop.
    CHECK(a.header_bytes.min >= 8.0);
    CHECK(static_cast<int>(a.header_bytes.min - 6) % 2 == 0);

    ScenarioConfig hetero = config_from(base + "heterogeneous_addresses = true\n");
    const RunReport b = run(hetero);
    CHECK(b.header_bytes.mean > a.header_bytes.mean);
}

TEST_CASE("churn is normalized to switches per node-hour") {
    ScenarioConfig cfg = config_from(
        "node_count = 30\n"
        "asymmetry_sigma = 0.2\n"
        "rate_hz = 4\n"
        "duration_s = 900\n"
        "warmup_s = 300\n"
        "seed = 2\n");
    const RunReport report = run(cfg);
    const double node_hours = 30.0 * (900.0 - 300.0) / 3600.0;  // 5 node-hours
    CHECK(report.switches_per_node_hour ==
          doctest::Approx(static_cast<double>(report.parent_switches) / node_hours));
    // A stable network under hysteresis must not flap: well below one switch
    // per node per minute.
    CHECK(report.switches_per_node_hour < 60.0);
}

TEST_CASE("consistency snapshots cover the post-warmup timeline") {
    ScenarioConfig cfg = config_from(
        "node_count = 20\n"
        "asymmetry_sigma = 0.1\n"
        "duration_s = 300\n"
        "warmup_s = 60\n"
        "snapshot_period_s = 10\n"
        "seed = 23\n");
    const RunReport report = run(cfg);
    REQUIRE(!report.consistency.empty());
    CHECK(report.consistency.front().time_ms == 60'000);
    for (const auto& snap : report.consistency) {
        CHECK(snap.time_ms >= 60'000);
        CHECK(snap.status.size() == 20);
    }
    // The totals tally one row per non-root node per snapshot.
    std::uint64_t rows = 0;
    for (const auto& [label, count] : report.consistency_totals) rows += count;
    CHECK(rows == report.consistency.size() * 19);
}
