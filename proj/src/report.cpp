#include "rplmesh/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace rplmesh {

int PacketJourney::delivered_hop_count() const {
    int n = 0;
    for (const auto& h : hops)
        if (h.delivered) ++n;
    return n;
}

DistributionSummary DistributionSummary::of(std::vector<double> samples) {
    DistributionSummary s;
    s.count = samples.size();
    if (samples.empty()) return s;
    std::sort(samples.begin(), samples.end());
    s.min = samples.front();
    s.max = samples.back();
    s.median = samples[samples.size() / 2];
    s.p99 = samples[static_cast<std::size_t>(
        std::min<double>(std::floor(0.99 * static_cast<double>(samples.size())),
                         static_cast<double>(samples.size() - 1)))];
    double sum = 0.0;
    for (double v : samples) sum += v;
    s.mean = sum / static_cast<double>(samples.size());
    return s;
}

double rule_of_three(std::uint64_t n_sent, std::uint64_t losses) {
    if (n_sent == 0) throw std::invalid_argument("n_sent must be >= 1");
    if (losses == 0) return 3.0 / static_cast<double>(n_sent);
    return static_cast<double>(losses) / static_cast<double>(n_sent);
}

std::uint64_t RunReport::total_losses() const {
    std::uint64_t total = 0;
    for (auto v : losses_by_cause) total += v;
    return total;
}

double RunReport::loss_rate() const {
    if (packets_sent == 0) return 0.0;
    return static_cast<double>(total_losses()) / static_cast<double>(packets_sent);
}

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json summary_json(const DistributionSummary& s) {
    return ordered_json{{"count", s.count}, {"min", s.min},   {"median", s.median},
                        {"mean", s.mean},  {"p99", s.p99},    {"max", s.max}};
}

constexpr std::array<LossCause, kLossCauseCount> kCauseOrder{
    LossCause::MacDrop, LossCause::RouteNotFound, LossCause::SpuriousDuplicate,
    LossCause::QueueOverflow};

}  // namespace

std::string RunReport::to_json() const {
    ordered_json j;
    j["scenario"] = scenario;
    ordered_json totals;
    totals["packets_sent"] = packets_sent;
    totals["delivered"] = delivered;
    totals["lost"] = total_losses();
    totals["loss_rate"] = loss_rate();
    if (packets_sent > 0)
        totals["loss_rate_bound_95"] = rule_of_three(packets_sent, total_losses());
    j["totals"] = totals;
    ordered_json causes;
    for (LossCause c : kCauseOrder)
        causes[std::string(loss_cause_label(c))] =
            losses_by_cause[static_cast<std::size_t>(c)];
    j["causes"] = causes;
    j["latency_ms"] = summary_json(latency_ms);
    j["hop_count"] = summary_json(hop_count);
    j["up_link_prr"] = summary_json(up_link_prr);
    j["down_link_prr"] = summary_json(down_link_prr);
    j["parent_staleness_s"] = summary_json(parent_staleness_s);
    j["header_bytes"] = summary_json(header_bytes);
    j["radius_hops"] = radius_hops;
    j["parent_switches"] = parent_switches;
    j["switches_per_node_hour"] = switches_per_node_hour;
    j["control_drops"] = control_drops;
    j["dao_rejects"] = dao_rejects;
    j["saturated"] = saturated;
    j["consistency_totals"] = consistency_totals;
    return j.dump(2) + "\n";
}

std::string RunReport::causes_csv() const {
    std::ostringstream out;
    out << "cause,count,rate\n";
    out.precision(17);
    for (LossCause c : kCauseOrder) {
        const std::uint64_t count = losses_by_cause[static_cast<std::size_t>(c)];
        const double rate =
            packets_sent == 0 ? 0.0
                              : static_cast<double>(count) / static_cast<double>(packets_sent);
        out << loss_cause_label(c) << ',' << count << ',' << rate << '\n';
    }
    return out.str();
}

std::string RunReport::consistency_csv() const {
    std::ostringstream out;
    out << "time_ms,node_id,status\n";
    for (const auto& snap : consistency) {
        for (std::size_t id = 0; id < snap.status.size(); ++id) {
            out << snap.time_ms << ',' << id << ','
                << node_status_label(snap.status[id]) << '\n';
        }
    }
    return out.str();
}

std::string RunReport::journeys_csv() const {
    std::ostringstream out;
    out << "packet_id,src,dst,send_time_ms,terminal,cause,latency_ms,hops\n";
    for (const auto& journey : journeys) {
        out << journey.packet_id << ',' << journey.src << ',' << journey.dst << ','
            << journey.send_time_ms << ','
            << (journey.delivered ? "DELIVERED" : "LOST") << ','
            << (journey.cause ? loss_cause_label(*journey.cause) : "") << ','
            << journey.latency_ms() << ',' << journey.delivered_hop_count() << '\n';
    }
    return out.str();
}

void emit_report(const RunReport& report, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    const auto write = [&](const std::string& name, const std::string& content) {
        const fs::path path = fs::path(out_dir) / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out << content;
    };
    write("report.json", report.to_json());
    write("causes.csv", report.causes_csv());
    write("consistency.csv", report.consistency_csv());
    if (report.journeys_recorded) write("journeys.csv", report.journeys_csv());
}

}  // namespace rplmesh
