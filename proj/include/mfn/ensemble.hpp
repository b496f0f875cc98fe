#pragma once

#include <vector>

#include "mfn/errors.hpp"
#include "mfn/grid.hpp"
#include "mfn/model.hpp"
#include "mfn/noise.hpp"
#include "mfn/segment.hpp"
#include "mfn/spatial.hpp"

namespace mfn {

// Trajectories of a set of units over the full grid, stored row-major by
// time row so that one step touches contiguous memory.
class EnsembleStore {
 public:
  EnsembleStore() = default;
  EnsembleStore(int units, const TimeGrid& grid, int dim)
      : units_(units),
        rows_(grid.rows()),
        dim_(dim),
        data_(static_cast<size_t>(units) * grid.rows() * dim, 0.0) {}

  int units() const { return units_; }
  int rows() const { return rows_; }
  int dim() const { return dim_; }

  double* at(int row, int unit) {
    return data_.data() + (static_cast<size_t>(row) * units_ + unit) * dim_;
  }
  const double* at(int row, int unit) const {
    return data_.data() + (static_cast<size_t>(row) * units_ + unit) * dim_;
  }

  SegmentView segment(int unit, int end_row, int window) const {
    return SegmentView(at(end_row - window + 1, unit), dim_, window, 0, window, units_ * dim_);
  }

  const std::vector<double>& data() const { return data_; }

 private:
  int units_ = 0;
  int rows_ = 0;
  int dim_ = 0;
  std::vector<double> data_;
};

struct UnitStreams {
  uint32_t particle = 0;
  uint32_t replica = 0;
};

// Interaction field over a set of source units. Weights carry the engine
// semantics: the network uses count/S per cell (separable) or 1/S per source
// (direct); the mean-field limit uses R-masses per cell or R(cell)/count per
// copy. Refresh aggregates the separable statistic per (population, cell)
// from committed rows only; evaluation is then per receiver. Source k must
// be unit k of `sources` (both engines store sources first).
class CouplingField {
 public:
  CouplingField(const ModelPtr& model, const SpatialLayout& layout, const TimeGrid& grid,
                const EnsembleStore* sources, std::vector<Site> source_sites,
                std::vector<double> per_source_weight, std::vector<double> per_cell_weight,
                bool use_separable, bool exclude_self);

  // Aggregates the per-source statistic at the step ending at `end_row`.
  void refresh(double t, int end_row, const Disorder& disorder);

  void drift(double t, const Site& receiver, const double* x, const Disorder& d, Vec& out) const;
  void diffusion(double t, const Site& receiver, int alpha, const double* x, const Disorder& d,
                 Mat& out) const;
  void jump(double t, const Site& receiver, int alpha, const double* x, const Disorder& d,
            double mark, Vec& out) const;
  void jump_compensator(double t, const Site& receiver, int alpha, const double* x,
                        const Disorder& d, Vec& out) const;

  bool separable_active() const { return use_separable_; }
  int populations() const;

  // Cell-aggregate inspection (tests).
  const double* cell_stat_mean(int alpha, int cell) const;

 private:
  int cell_slot(int alpha, int cell) const { return cell_offset_[alpha] + cell; }
  template <class Fn>
  void for_sources_in(int alpha, const Fn& fn) const;

  ModelPtr model_;
  const SpatialLayout* layout_;
  const TimeGrid* grid_;
  const EnsembleStore* sources_;
  std::vector<Site> source_sites_;
  std::vector<double> source_weight_;
  std::vector<double> cell_weight_;
  std::vector<int> cell_offset_;
  std::vector<int> cell_count_;
  std::vector<std::vector<int>> sources_by_pop_;
  bool use_separable_ = false;
  bool exclude_self_ = false;
  int stat_dim_ = 0;
  int total_cells_ = 0;
  int end_row_ = -1;
  std::vector<double> stat_mean_;  // total_cells x stat_dim
};

struct StepDiagnostics {
  std::vector<double> max_step_delta;  // per integration step
  double overall_max = 0.0;
};

struct AdvanceOptions {
  uint64_t run_seed = 0;
  double r_guard = 1e6;
  bool record_diagnostics = false;
};

// Runs the Euler recursion for all units over the full grid: per step the
// field (if any) is refreshed from committed rows, then every unit advances
// independently (Jacobi update). Rows 0..n must already hold initial paths.
StepDiagnostics advance_ensemble(const ModelPtr& model, const TimeGrid& grid, EnsembleStore& store,
                                 const std::vector<Site>& sites,
                                 const std::vector<UnitStreams>& streams, CouplingField* field,
                                 const Disorder& disorder, const AdvanceOptions& options);

}  // namespace mfn
