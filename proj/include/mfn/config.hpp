#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mfn/disorder.hpp"
#include "mfn/grid.hpp"
#include "mfn/model.hpp"
#include "mfn/segment.hpp"
#include "mfn/spatial.hpp"

namespace mfn {

enum class RunMode { network, meanfield, chaos_study };

// A fully validated run setup: every type invariant is checked at load time,
// unknown sections or keys are errors naming the offending key.
struct RunConfig {
  TimeGrid grid;

  int populations = 1;
  int cells = 1;

  std::string model_id;
  std::map<std::string, double> model_params;  // resolved (includes nu_total override)
  ModelPtr model;
  std::optional<DelayMeasure> delay_override;

  uint64_t seed = 0;
  double r_guard = 1e6;
  DisorderSpec disorder;

  RunMode mode = RunMode::network;
  int particles = 8;       // N per population (network / paired runs)
  int copies = 64;         // M
  int replicas = 16;       // Rp
  int disorder_draws = 4;  // D
  std::vector<int> n_list;
  std::string out_dir = "out";
  int threads = 0;
  double epsilon = -1.0;  // C2 reporting epsilon; <0 = use the model's cell epsilon
  bool write_trajectories = false;
  double slope_band_lo = -1.3;
  double slope_band_hi = -0.7;

  std::string source_path;
  std::string resolved_text;  // normalized key=value dump, embedded in manifests

  SpatialLayout layout_for(int count_per_population) const {
    return SpatialLayout::lattice(populations, count_per_population, cells);
  }
  SpatialLayout layout() const { return layout_for(particles); }

  // The delay measure actually in force (override or model default).
  DelayMeasure active_delay_measure() const {
    return delay_override ? *delay_override : model->delay_measure(grid.tau);
  }
};

RunConfig load_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<inline>");

const char* run_mode_name(RunMode mode);

}  // namespace mfn
