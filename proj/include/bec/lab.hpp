#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bec/certify.hpp"
#include "bec/excitation.hpp"
#include "bec/graph.hpp"
#include "bec/plant.hpp"

// Config-driven experiment runner: built-in scenarios, schedule construction,
// CSV/JSON emission of time series and analysis reports.

namespace bec::lab {

using json = nlohmann::json;

struct AnalysisFlags {
  bool excitation = true;
  bool certificate = true;
  bool fig6 = true;
  // When set, a non-increasing Lyapunov value beyond Tbar is a hard check.
  bool require_v_monotone = false;
};

struct ScenarioConfig {
  std::string name = "custom";
  plant::SimConfig sim;
  double T_joint = 8.0;      // joint-connectivity / PE window
  double Tbar = 8.0;         // initial-excitation window
  double fig6_window = 4.0;
  double delta = 0.25;       // joint-connectivity edge-integral threshold
  AnalysisFlags analyses;
  std::string out_dir = "out";
};

// Reference 5-node adjacency matrices: one connected non-bipartite, one
// connected bipartite.
graph::WeightedAdjacency adjacency_b();
graph::WeightedAdjacency adjacency_c();

// Single-edge round-robin decomposition of a parent graph: within every
// rotation window each parent edge is active alone for rotation/|E|, cycling
// through the phase. The union over one full rotation is
// (rotation/|E|) * parent, exactly.
graph::GraphSchedule build_schedule(const graph::WeightedAdjacency& parent,
                                    double phase, double rotation);

// Two consecutive round-robin phases; the second repeats to `total`.
graph::GraphSchedule build_two_phase(const graph::WeightedAdjacency& first,
                                     const graph::WeightedAdjacency& second,
                                     double phase1, double rotation,
                                     double total);

// Built-in scenario: 5 quadrotor-like agents, non-bipartite cycling for the
// first 8 s and bipartite cycling afterwards.
ScenarioConfig paper_scenario();
// Identical except the bipartite graph runs from t = 0 on.
ScenarioConfig counterfactual_scenario();

struct Fig6Scan {
  std::vector<double> times;
  std::vector<double> dets; // det of the union signless Laplacian
};

// Sliding-window determinant of int_t^{t+T} Q(tau) dtau. Parallel over
// windows; the serial variant is the testing reference.
Fig6Scan fig6_scan(const graph::GraphSchedule& sched, double T,
                   double grid_step = 0.05);
Fig6Scan fig6_scan_serial(const graph::GraphSchedule& sched, double T,
                          double grid_step = 0.05);

struct SummaryReport {
  std::string name;
  double runtime_seconds = 0.0;

  double final_consensus_error = 0.0;
  double final_vel_norm = 0.0;
  double initial_bias_err = 0.0;
  double final_bias_err = 0.0;
  double theta_tilde0 = 0.0;
  double theta_tilde_max = 0.0;

  std::optional<excitation::ExcitationReport> cie_filtered;
  std::optional<excitation::NecieBlocks> necie;
  std::optional<certify::CertificateConstants> certificate;
  std::optional<certify::LogFit> bias_decay_fit;

  std::map<std::string, bool> checks;

  bool all_checks_pass() const;
};

json to_json(const SummaryReport& report);

json schedule_to_json(const graph::GraphSchedule& sched);
graph::GraphSchedule schedule_from_json(const json& doc);

// Builds a scenario from a JSON document; "scenario" may name a built-in
// base ("paper" / "counterfactual"), individual keys override it.
ScenarioConfig config_from_json(const json& doc);
ScenarioConfig config_from_file(const std::string& path);

void write_trajectory_csv(const plant::TrajectoryLog& log,
                          const std::string& path);
void write_fig6_csv(const Fig6Scan& scan, const std::string& path);

// Integrates, runs the requested analyses, writes trajectory.csv,
// schedule.json, fig6.csv and summary.json under cfg.out_dir.
SummaryReport run_scenario(const ScenarioConfig& cfg);

// Analysis entry points shared with the tests; operate on an existing log.
std::vector<excitation::MatrixSignal> filtered_regressor_signals(
    const plant::TrajectoryLog& log);
std::vector<excitation::MatrixSignal> raw_regressor_signals(
    const plant::TrajectoryLog& log, const graph::GraphSchedule& sched);

} // namespace bec::lab
