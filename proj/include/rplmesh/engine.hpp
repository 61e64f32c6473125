/*
 * Deterministic discrete-event simulation loop tying topology, estimators,
 * metrics, routing state and the MAC model together. One run is one logical
 * thread; identical (config, seed) pairs produce identical reports.
 */
#pragma once

#include "rplmesh/config.hpp"
#include "rplmesh/report.hpp"
#include "rplmesh/topology.hpp"

namespace rplmesh {

RunReport run(const ScenarioConfig& cfg);
RunReport run(const ScenarioConfig& cfg, const Topology& topo);

}  // namespace rplmesh
