/*
 * Python bindings for the main operations: topology construction, metric and
 * delivery math, header sizing, the rule of three, full simulation runs and
 * the trace-replay study.
 */
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "rplmesh/config.hpp"
#include "rplmesh/engine.hpp"
#include "rplmesh/link_estimator.hpp"
#include "rplmesh/metrics.hpp"
#include "rplmesh/replay.hpp"
#include "rplmesh/report.hpp"
#include "rplmesh/routing.hpp"
#include "rplmesh/trace.hpp"

namespace py = pybind11;
using namespace rplmesh;

namespace {

ScenarioConfig config_from_text(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

std::string run_config_text(const std::string& text,
                            std::optional<std::uint64_t> seed) {
    ScenarioConfig cfg = config_from_text(text);
    if (seed) cfg.seed = *seed;
    return run(cfg).to_json();
}

std::string run_config_file(const std::string& path,
                            std::optional<std::uint64_t> seed) {
    ScenarioConfig cfg = load_config(path);
    if (seed) cfg.seed = *seed;
    return run(cfg).to_json();
}

std::vector<Metric> parse_metric_list(const std::string& spec, int retries) {
    std::vector<Metric> metrics;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) metrics.push_back(Metric::parse(tok, retries));
    return metrics;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "RPL downward-routing reliability simulator";

    py::class_<Topology>(m, "Topology")
        .def_property_readonly("node_count", &Topology::node_count)
        .def_property_readonly("root", &Topology::root)
        .def("prr_at",
             [](const Topology& t, NodeId src, NodeId dst, std::int64_t time_ms) {
                 return t.prr_at(src, dst, time_ms);
             },
             py::arg("src"), py::arg("dst"), py::arg("time_ms") = 0)
        .def("neighbors_out", &Topology::neighbors_out);

    py::class_<SynthParams>(m, "SynthParams")
        .def(py::init<>())
        .def_readwrite("area_size", &SynthParams::area_size)
        .def_readwrite("range", &SynthParams::range)
        .def_readwrite("asymmetry_sigma", &SynthParams::asymmetry_sigma)
        .def_readwrite("connectivity_floor", &SynthParams::connectivity_floor)
        .def_readwrite("max_retries", &SynthParams::max_retries);

    m.def("generate_synthetic", &generate_synthetic, py::arg("node_count"),
          py::arg("seed"), py::arg("params") = SynthParams{});
    m.def("load_trace",
          [](const std::string& path, std::int64_t window_ms, NodeId root) {
              return load_trace(path, window_ms, root);
          },
          py::arg("path"), py::arg("window_ms") = kDefaultWindowMs, py::arg("root") = 0);
    m.def("save_trace",
          [](const Topology& topo, const std::string& path, std::int64_t window_ms) {
              save_trace(topo, path, window_ms);
          },
          py::arg("topology"), py::arg("path"), py::arg("window_ms") = kDefaultWindowMs);

    m.def("etx_from_rssi", &etx_from_rssi, py::arg("rssi_dbm"));
    m.def("rank_etxn", &rank_etxn, py::arg("parent_rank"), py::arg("prr"), py::arg("n"));
    m.def("rank_lr", &rank_lr, py::arg("parent_lr"), py::arg("prr"), py::arg("r"));
    m.def("hop_success", &hop_success, py::arg("prr"), py::arg("r"));
    m.def("path_delivery",
          [](const std::vector<double>& prrs, int r) { return path_delivery(prrs, r); },
          py::arg("prrs"), py::arg("r"));
    m.def("path_delivery_down",
          [](const std::vector<double>& prrs, int r) {
              return path_delivery_down(prrs, r);
          },
          py::arg("down_prrs"), py::arg("r"));
    m.def("rule_of_three", &rule_of_three, py::arg("n_sent"), py::arg("losses"));

    m.def("make_addresses", &make_addresses, py::arg("node_count"),
          py::arg("heterogeneous") = false, py::arg("seed") = 0);
    m.def("header_size",
          [](const std::vector<NodeId>& hops,
             const std::map<NodeId, LinkAddress>& addresses, NodeId root,
             bool prefix_shared) {
              return header_size(hops, addresses, root, prefix_shared);
          },
          py::arg("hops"), py::arg("addresses"), py::arg("root"),
          py::arg("prefix_shared") = true);

    // Full runs and the replay study return report JSON; the package wrapper
    // turns it into dicts.
    m.def("run_config_text", &run_config_text, py::arg("config_text"),
          py::arg("seed") = py::none());
    m.def("run_config_file", &run_config_file, py::arg("config_path"),
          py::arg("seed") = py::none());
    m.def("replay_study_json",
          [](const Topology& topo, const std::string& metrics, int retries,
             std::int64_t window_ms) {
              const auto ms = parse_metric_list(metrics, retries);
              return replay_summary_json(replay_metric_study(topo, ms, retries, window_ms));
          },
          py::arg("topology"), py::arg("metrics") = "etx,etxn:2,lr",
          py::arg("retries") = 8, py::arg("window_ms") = kDefaultWindowMs);
}
