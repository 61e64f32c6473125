/*
 * rplmesh CLI: `simulate` runs one scenario, `replay` runs the trace-driven
 * metric study, `analyze` aggregates a directory of runs into combined loss
 * statistics with the rule-of-three bound for zero-loss sweeps.
 */
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rplmesh/config.hpp"
#include "rplmesh/engine.hpp"
#include "rplmesh/replay.hpp"
#include "rplmesh/report.hpp"
#include "rplmesh/trace.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

int cmd_simulate(const std::string& config_path, std::optional<std::uint64_t> seed,
                 const std::string& out_dir) {
    rplmesh::ScenarioConfig cfg = rplmesh::load_config(config_path);
    if (seed) cfg.seed = *seed;
    const rplmesh::RunReport report = rplmesh::run(cfg);
    rplmesh::emit_report(report, out_dir);

    std::cout << "sent=" << report.packets_sent << " delivered=" << report.delivered
              << " lost=" << report.total_losses() << " loss_rate=" << report.loss_rate()
              << "\n";
    for (int c = 0; c < rplmesh::kLossCauseCount; ++c) {
        std::cout << "  " << rplmesh::loss_cause_label(static_cast<rplmesh::LossCause>(c))
                  << "=" << report.losses_by_cause[c] << "\n";
    }
    if (report.saturated) std::cout << "  warning: queues saturated\n";
    std::cout << "report written to " << out_dir << "\n";
    return 0;
}

int cmd_replay(const std::string& trace_path, const std::string& metrics_arg, int retries,
               std::int64_t window_ms, const std::string& out_dir) {
    std::vector<rplmesh::Metric> metrics;
    std::stringstream ss(metrics_arg);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) metrics.push_back(rplmesh::Metric::parse(tok, retries));
    }
    if (metrics.empty()) {
        std::cerr << "no metrics given\n";
        return 1;
    }
    const rplmesh::Topology topo = rplmesh::load_trace(trace_path, window_ms);
    const auto results = rplmesh::replay_metric_study(topo, metrics, retries, window_ms);

    fs::create_directories(out_dir);
    std::ofstream csv(fs::path(out_dir) / "replay.csv");
    for (std::size_t i = 0; i < results.size(); ++i) {
        std::istringstream rows(results[i].csv());
        std::string line;
        bool first_line = true;
        while (std::getline(rows, line)) {
            if (first_line && i > 0) {
                first_line = false;
                continue;  // header only once
            }
            first_line = false;
            csv << line << '\n';
        }
    }
    std::ofstream json(fs::path(out_dir) / "replay.json");
    json << rplmesh::replay_summary_json(results);

    for (const auto& r : results) {
        std::cout << r.metric.label() << ": median_up_pdr=" << r.median_up_pdr
                  << " median_down_pdr=" << r.median_down_pdr
                  << " min_up_prr=" << r.min_up_prr << " min_down_prr=" << r.min_down_prr
                  << " mean_hops=" << r.mean_hops << " switches=" << r.total_switches
                  << "\n";
    }
    std::cout << "study written to " << out_dir << "\n";
    return 0;
}

int cmd_analyze(const std::string& runs_dir) {
    std::vector<fs::path> reports;
    if (fs::exists(fs::path(runs_dir) / "report.json"))
        reports.push_back(fs::path(runs_dir) / "report.json");
    for (const auto& entry : fs::directory_iterator(runs_dir)) {
        if (entry.is_directory() && fs::exists(entry.path() / "report.json"))
            reports.push_back(entry.path() / "report.json");
    }
    std::sort(reports.begin(), reports.end());
    if (reports.empty()) {
        std::cerr << "no report.json found under " << runs_dir << "\n";
        return 1;
    }

    std::uint64_t sent = 0, delivered = 0;
    std::map<std::string, std::uint64_t> causes;
    for (const auto& path : reports) {
        std::ifstream in(path);
        ordered_json j = ordered_json::parse(in);
        sent += j["totals"]["packets_sent"].get<std::uint64_t>();
        delivered += j["totals"]["delivered"].get<std::uint64_t>();
        for (auto& [cause, count] : j["causes"].items())
            causes[cause] += count.get<std::uint64_t>();
    }
    const std::uint64_t lost = sent - delivered;

    ordered_json out;
    out["runs"] = reports.size();
    out["packets_sent"] = sent;
    out["delivered"] = delivered;
    out["lost"] = lost;
    out["loss_rate"] = sent ? static_cast<double>(lost) / static_cast<double>(sent) : 0.0;
    if (sent > 0) {
        out["loss_rate_bound_95"] = rplmesh::rule_of_three(sent, lost);
        out["bound_is_rule_of_three"] = (lost == 0);
    }
    out["causes"] = causes;

    const fs::path agg = fs::path(runs_dir) / "aggregate.json";
    std::ofstream agg_out(agg);
    agg_out << out.dump(2) << "\n";
    std::cout << out.dump(2) << "\n";
    std::cout << "aggregate written to " << agg.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RPL downward-routing reliability simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".";
    std::optional<std::uint64_t> seed;
    auto* simulate = app.add_subcommand("simulate", "run one scenario");
    simulate->add_option("--config", config_path, "scenario config file")->required();
    simulate->add_option("--seed", seed, "override the config seed");
    simulate->add_option("--out", out_dir, "output directory");

    std::string trace_path, metrics_arg = "etx,etxn:2,lr", replay_out = ".";
    int retries = 8;
    std::int64_t window_ms = rplmesh::kDefaultWindowMs;
    auto* replay = app.add_subcommand("replay", "trace-driven metric study");
    replay->add_option("--trace", trace_path, "trace file")->required();
    replay->add_option("--metrics", metrics_arg, "comma list: etx, etxn:<n>, lr");
    replay->add_option("--retries", retries, "link-layer retries R");
    replay->add_option("--window-ms", window_ms, "PRR window length");
    replay->add_option("--out", replay_out, "output directory");

    std::string runs_dir;
    auto* analyze = app.add_subcommand("analyze", "aggregate a directory of runs");
    analyze->add_option("--runs", runs_dir, "directory of run outputs")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(config_path, seed, out_dir);
        if (replay->parsed()) return cmd_replay(trace_path, metrics_arg, retries,
                                                window_ms, replay_out);
        if (analyze->parsed()) return cmd_analyze(runs_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
