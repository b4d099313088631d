#pragma once

// Benchmark harness: plans every scene, scores it with the oracle and
// aggregates success rates, diversity and roughness.

#include "edmp/eval.hpp"
#include "edmp/planner.hpp"

#include <string>
#include <vector>

namespace edmp::bench {

struct SceneRecord {
  std::string scene;
  std::string kind;
  bool success_selected = false;
  bool success_any = false;
  std::vector<bool> guide_flags;     // sub-batch holds a collision-free trajectory
  std::vector<bool> guide_selected;  // sub-batch's own pick is collision-free
  std::vector<double> guide_acsm;    // diversity inside each sub-batch (NaN if size 1)
  double acsm = 0.0;                 // whole batch
  eval::Roughness roughness;         // whole batch
  double path_length = 0.0;          // selected trajectory
  double wall_ms = 0.0;
  std::string error;                 // non-empty when planning threw
};

struct BenchReport {
  int guides = 0;
  std::vector<SceneRecord> records;  // sorted by scene name

  double success_selected() const;
  double success_any() const;
  double acsm() const;
  eval::Roughness roughness() const;
  // Fraction of scenes where guide g's sub-batch succeeded.
  std::vector<double> guide_contribution() const;
  std::vector<double> guide_success_selected() const;
  std::vector<double> guide_acsm() const;
  // Entry k: fraction of scenes solved by the union of guides 0..k.
  std::vector<double> prefix_success_any() const;
};

struct BenchConfig {
  planner::PlanConfig plan;
};

BenchReport bench(const nn::Denoiser& net, const diffusion::Schedule& sched, std::vector<Scene> scenes,
                  const chain::ChainSpec& chain, std::span<const guidance::GuideConfig> guides, const BenchConfig& cfg);

// Columns: scene,kind,success_selected,success_any,guide_flags,path_length,wall_ms.
// wall_ms is written as 0 unless `timing` is set, which keeps reruns
// byte-identical.
std::string report_csv(const BenchReport& report, bool timing);
std::string summary_csv(const BenchReport& report);
std::string sweep_csv(const BenchReport& report);
// Line chart of prefix_success_any against guide count.
std::string sweep_svg(const BenchReport& report);

}  // namespace edmp::bench
