#pragma once

#include <string>

#include "dcopf/algorithm.hpp"
#include "dcopf/costs.hpp"
#include "dcopf/metrics.hpp"
#include "dcopf/network.hpp"
#include "dcopf/trace.hpp"

namespace dcopf {

struct ExperimentConfig {
  std::string case_path;
  int horizon = 2000;
  std::uint64_t seed = 42;
  StepSchedule schedule;
  std::array<double, 2> a_range{0.001, 0.08};
  std::array<double, 2> b_range{1.0, 5.0};
  double c_fixed = 0.0;
  GradVariant variant = GradVariant::consensus_duals;
  std::string out_dir = "results";
  int stride = 1;  // trace.csv keeps rounds with (t-1) % stride == 0, plus t=T

  CostStreamConfig stream() const;
};

struct RunArtifacts {
  std::string trace_csv;
  std::string curves_csv;
  std::string summary_json;
  double regret_final = 0.0;
  double violation_final = 0.0;
  TheoremReport report;
  BoundConstants constants;
  double wall_seconds = 0.0;  // stdout only, never written into artifacts
};

// Case ingestion: JSON file with MW quantities, converted to per-unit on
// base_mva. Throws std::runtime_error with field context on parse errors and
// a joined report on validation failures.
Network load_case(const std::string& path);
Network load_case_string(const std::string& text);

// Run the full horizon from the zero initialization; one TraceRow per round.
RunTrace simulate_rounds(const SystemModel& model, const StepSchedule& sched,
                         const CostStreamConfig& stream, GradVariant variant,
                         int horizon);

// Orchestrates one experiment: simulate, compare against hindsight, write
// trace.csv / curves.csv / summary.json under out_dir.
RunArtifacts run_experiment(const ExperimentConfig& cfg);

// Config echo round-trip used by summary.json (12-significant-digit floats).
std::string config_to_json_string(const ExperimentConfig& cfg);
ExperimentConfig config_from_json_string(const std::string& text);

// Shortest-faithful decimal capped at 12 significant digits ("%.12g"), the
// formatting contract of every artifact number.
std::string format_sig12(double x);
double round_sig12(double x);

int cli_main(int argc, char** argv);

}  // namespace dcopf
