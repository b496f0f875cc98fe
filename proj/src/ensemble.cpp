#include "mfn/ensemble.hpp"

#include <cstring>
#include <mutex>

#include "mfn/parallel.hpp"

namespace mfn {

CouplingField::CouplingField(const ModelPtr& model, const SpatialLayout& layout,
                             const TimeGrid& grid, const EnsembleStore* sources,
                             std::vector<Site> source_sites, std::vector<double> per_source_weight,
                             std::vector<double> per_cell_weight, bool use_separable,
                             bool exclude_self)
    : model_(model),
      layout_(&layout),
      grid_(&grid),
      sources_(sources),
      source_sites_(std::move(source_sites)),
      source_weight_(std::move(per_source_weight)),
      cell_weight_(std::move(per_cell_weight)),
      use_separable_(use_separable && model->coupling_separable()),
      exclude_self_(exclude_self) {
  const int P = layout.populations();
  cell_offset_.resize(static_cast<size_t>(P));
  total_cells_ = 0;
  for (int a = 0; a < P; ++a) {
    cell_offset_[a] = total_cells_;
    total_cells_ += layout.num_cells(a);
  }
  if (static_cast<int>(cell_weight_.size()) != total_cells_)
    throw ShapeError("coupling field: cell weight table size mismatch");
  cell_count_.assign(static_cast<size_t>(total_cells_), 0);
  sources_by_pop_.resize(static_cast<size_t>(P));
  for (size_t s = 0; s < source_sites_.size(); ++s) {
    const Site& site = source_sites_[s];
    ++cell_count_[static_cast<size_t>(cell_slot(site.population, site.cell))];
    sources_by_pop_[static_cast<size_t>(site.population)].push_back(static_cast<int>(s));
  }
  stat_dim_ = model->coupling_stat_dim();
  if (use_separable_) stat_mean_.assign(static_cast<size_t>(total_cells_) * stat_dim_, 0.0);
}

int CouplingField::populations() const { return layout_->populations(); }

const double* CouplingField::cell_stat_mean(int alpha, int cell) const {
  return stat_mean_.data() + static_cast<size_t>(cell_slot(alpha, cell)) * stat_dim_;
}

void CouplingField::refresh(double t, int end_row, const Disorder& disorder) {
  end_row_ = end_row;
  if (!use_separable_) return;
  const int window = grid_->steps_per_delay + 1;
  const int n_src = static_cast<int>(source_sites_.size());
  const int nchunks = num_chunks(n_src);
  // Per-chunk partial sums, merged in chunk order.
  std::vector<double> partial(static_cast<size_t>(nchunks) * total_cells_ * stat_dim_, 0.0);
  parallel_for_chunks(n_src, [&](int lo, int hi) {
    const int c = chunk_of(lo);
    double* acc = partial.data() + static_cast<size_t>(c) * total_cells_ * stat_dim_;
    std::vector<double> stat(static_cast<size_t>(stat_dim_));
    for (int s = lo; s < hi; ++s) {
      const Site& site = source_sites_[static_cast<size_t>(s)];
      const SegmentView seg = sources_->segment(s, end_row, window);
      model_->coupling_stat(t, site, seg, disorder, stat.data());
      double* slot = acc + static_cast<size_t>(cell_slot(site.population, site.cell)) * stat_dim_;
      for (int k = 0; k < stat_dim_; ++k) slot[k] += stat[k];
    }
  });
  std::fill(stat_mean_.begin(), stat_mean_.end(), 0.0);
  for (int c = 0; c < nchunks; ++c) {
    const double* acc = partial.data() + static_cast<size_t>(c) * total_cells_ * stat_dim_;
    for (size_t i = 0; i < stat_mean_.size(); ++i) stat_mean_[i] += acc[i];
  }
  for (int slot = 0; slot < total_cells_; ++slot)
    if (cell_count_[static_cast<size_t>(slot)] > 0)
      for (int k = 0; k < stat_dim_; ++k)
        stat_mean_[static_cast<size_t>(slot) * stat_dim_ + k] /= cell_count_[static_cast<size_t>(slot)];
}

template <class Fn>
void CouplingField::for_sources_in(int alpha, const Fn& fn) const {
  const int window = grid_->steps_per_delay + 1;
  for (int s : sources_by_pop_[static_cast<size_t>(alpha)]) {
    const Site& site = source_sites_[static_cast<size_t>(s)];
    const SegmentView seg = sources_->segment(s, end_row_, window);
    fn(site, seg, source_weight_[static_cast<size_t>(s)]);
  }
}

void CouplingField::drift(double t, const Site& receiver, const double* x, const Disorder& d,
                          Vec& out) const {
  const int dim = model_->dims().state;
  Vec tmp(dim);
  out.resize(dim);
  if (use_separable_) {
    std::vector<double> self_stat;
    for (int a = 0; a < populations(); ++a)
      for (int m = 0; m < layout_->num_cells(a); ++m) {
        const int slot = cell_slot(a, m);
        if (cell_count_[static_cast<size_t>(slot)] == 0) continue;
        tmp.set_zero();
        model_->coupling_drift_at(t, receiver, a, m, x, cell_stat_mean(a, m), d, tmp);
        out.axpy(cell_weight_[static_cast<size_t>(slot)], tmp);
      }
    if (exclude_self_) {
      self_stat.resize(static_cast<size_t>(stat_dim_));
      const int window = grid_->steps_per_delay + 1;
      const SegmentView seg = sources_->segment(receiver.index, end_row_, window);
      model_->coupling_stat(t, receiver, seg, d, self_stat.data());
      tmp.set_zero();
      model_->coupling_drift_at(t, receiver, receiver.population, receiver.cell, x,
                                self_stat.data(), d, tmp);
      out.axpy(-source_weight_[static_cast<size_t>(receiver.index)], tmp);
    }
    return;
  }
  for (int a = 0; a < populations(); ++a)
    for_sources_in(a, [&](const Site& src, const SegmentView& seg, double w) {
      if (exclude_self_ && src.index == receiver.index) return;
      tmp.set_zero();
      model_->coupling_drift(t, receiver, src, x, seg, d, tmp);
      out.axpy(w, tmp);
    });
}

void CouplingField::diffusion(double t, const Site& receiver, int alpha, const double* x,
                              const Disorder& d, Mat& out) const {
  const ModelDims dims = model_->dims();
  Mat tmp(dims.state, dims.pop_brownian);
  out.resize(dims.state, dims.pop_brownian);
  if (use_separable_) {
    for (int m = 0; m < layout_->num_cells(alpha); ++m) {
      const int slot = cell_slot(alpha, m);
      if (cell_count_[static_cast<size_t>(slot)] == 0) continue;
      tmp.set_zero();
      model_->coupling_diffusion_at(t, receiver, alpha, m, x, cell_stat_mean(alpha, m), d, tmp);
      out.axpy(cell_weight_[static_cast<size_t>(slot)], tmp);
    }
    if (exclude_self_ && receiver.population == alpha) {
      std::vector<double> self_stat(static_cast<size_t>(stat_dim_));
      const int window = grid_->steps_per_delay + 1;
      const SegmentView seg = sources_->segment(receiver.index, end_row_, window);
      model_->coupling_stat(t, receiver, seg, d, self_stat.data());
      tmp.set_zero();
      model_->coupling_diffusion_at(t, receiver, alpha, receiver.cell, x, self_stat.data(), d, tmp);
      out.axpy(-source_weight_[static_cast<size_t>(receiver.index)], tmp);
    }
    return;
  }
  for_sources_in(alpha, [&](const Site& src, const SegmentView& seg, double w) {
    if (exclude_self_ && src.index == receiver.index) return;
    tmp.set_zero();
    model_->coupling_diffusion(t, receiver, src, x, seg, d, tmp);
    out.axpy(w, tmp);
  });
}

void CouplingField::jump(double t, const Site& receiver, int alpha, const double* x,
                         const Disorder& d, double mark, Vec& out) const {
  const int dim = model_->dims().state;
  Vec tmp(dim);
  out.resize(dim);
  if (use_separable_) {
    for (int m = 0; m < layout_->num_cells(alpha); ++m) {
      const int slot = cell_slot(alpha, m);
      if (cell_count_[static_cast<size_t>(slot)] == 0) continue;
      tmp.set_zero();
      model_->coupling_jump_at(t, receiver, alpha, m, x, cell_stat_mean(alpha, m), d, mark, tmp);
      out.axpy(cell_weight_[static_cast<size_t>(slot)], tmp);
    }
    return;
  }
  for_sources_in(alpha, [&](const Site& src, const SegmentView& seg, double w) {
    if (exclude_self_ && src.index == receiver.index) return;
    tmp.set_zero();
    model_->coupling_jump(t, receiver, src, x, seg, d, mark, tmp);
    out.axpy(w, tmp);
  });
}

void CouplingField::jump_compensator(double t, const Site& receiver, int alpha, const double* x,
                                     const Disorder& d, Vec& out) const {
  const int dim = model_->dims().state;
  Vec tmp(dim);
  out.resize(dim);
  if (use_separable_) {
    for (int m = 0; m < layout_->num_cells(alpha); ++m) {
      const int slot = cell_slot(alpha, m);
      if (cell_count_[static_cast<size_t>(slot)] == 0) continue;
      tmp.set_zero();
      model_->coupling_jump_compensator_at(t, receiver, alpha, m, x, cell_stat_mean(alpha, m), d,
                                           tmp);
      out.axpy(cell_weight_[static_cast<size_t>(slot)], tmp);
    }
    return;
  }
  for_sources_in(alpha, [&](const Site& src, const SegmentView& seg, double w) {
    if (exclude_self_ && src.index == receiver.index) return;
    tmp.set_zero();
    model_->coupling_jump_compensator(t, receiver, src, x, seg, d, tmp);
    out.axpy(w, tmp);
  });
}

StepDiagnostics advance_ensemble(const ModelPtr& model, const TimeGrid& grid, EnsembleStore& store,
                                 const std::vector<Site>& sites,
                                 const std::vector<UnitStreams>& streams, CouplingField* field,
                                 const Disorder& disorder, const AdvanceOptions& options) {
  const ModelDims dims = model->dims();
  const int units = store.units();
  const int P = field != nullptr ? field->populations() : 0;
  const bool couple = field != nullptr && model->has_coupling();
  const bool couple_jumps = couple && model->has_coupling_jumps();
  const bool local_jumps = model->has_local_jumps() && model->jump_intensity() > 0.0;

  StepDiagnostics diag;
  if (options.record_diagnostics)
    diag.max_step_delta.assign(static_cast<size_t>(grid.num_steps - grid.time_zero_index()), 0.0);

  std::exception_ptr failure;
  std::mutex failure_mutex;
  const int nchunks = num_chunks(units);
  std::vector<double> chunk_max(static_cast<size_t>(nchunks), 0.0);

  for (int i = grid.time_zero_index(); i < grid.num_steps && !failure; ++i) {
    const double t = grid.time_of(i);
    if (couple) field->refresh(t, i, disorder);
    if (options.record_diagnostics) std::fill(chunk_max.begin(), chunk_max.end(), 0.0);

    parallel_for_chunks(units, [&](int lo, int hi) {
      try {
        Vec next(dims.state), tmp(dims.state), drift(dims.state);
        Vec dw(dims.brownian), db(dims.pop_brownian);
        Mat g(dims.state, dims.brownian);
        Mat b(dims.state, dims.pop_brownian);
        std::vector<JumpEvent> events;
        const std::function<double(CounterRng&)> mark_sampler = [&model](CounterRng& r) {
          return model->sample_mark(r);
        };
        double local_max = 0.0;

        for (int u = lo; u < hi; ++u) {
          const Site& site = sites[static_cast<size_t>(u)];
          const UnitStreams& st = streams[static_cast<size_t>(u)];
          const double* x = store.at(i, u);
          const uint32_t step = static_cast<uint32_t>(i);

          next.assign(x, dims.state);

          drift.set_zero();
          model->drift(t, site, x, disorder, drift);
          if (couple) {
            field->drift(t, site, x, disorder, tmp);
            drift += tmp;
          }
          next.axpy(grid.dt, drift);

          {
            const NoiseStreamKey w_key{options.run_seed, StreamKind::w_local, st.particle, 0,
                                       st.replica};
            brownian_increment(w_key, step, dims.brownian, grid.dt, dw.data());
            g.set_zero();
            model->diffusion(t, site, x, disorder, g);
            g.apply_add(dw.data(), next);
          }

          if (local_jumps) {
            const NoiseStreamKey n_key{options.run_seed, StreamKind::n_local, st.particle, 0,
                                       st.replica};
            jump_events(n_key, step, model->jump_intensity(), grid.dt, t, mark_sampler, events);
            for (const auto& ev : events) {
              tmp.set_zero();
              model->jump(t, site, x, disorder, ev.mark, tmp);
              next += tmp;
            }
            tmp.set_zero();
            model->jump_compensator(t, site, x, disorder, tmp);
            next.axpy(-grid.dt, tmp);
          }

          if (couple) {
            for (int a = 0; a < P; ++a) {
              const NoiseStreamKey b_key{options.run_seed, StreamKind::b_pop, st.particle,
                                         static_cast<uint32_t>(a), st.replica};
              brownian_increment(b_key, step, dims.pop_brownian, grid.dt, db.data());
              field->diffusion(t, site, a, x, disorder, b);
              b.apply_add(db.data(), next);
            }
            if (couple_jumps) {
              for (int a = 0; a < P; ++a) {
                const NoiseStreamKey np_key{options.run_seed, StreamKind::n_pop, st.particle,
                                            static_cast<uint32_t>(a), st.replica};
                jump_events(np_key, step, model->jump_intensity(), grid.dt, t, mark_sampler, events);
                for (const auto& ev : events) {
                  field->jump(t, site, a, x, disorder, ev.mark, tmp);
                  next += tmp;
                }
                field->jump_compensator(t, site, a, x, disorder, tmp);
                next.axpy(-grid.dt, tmp);
              }
            }
          }

          const double n2 = next.squared_norm();
          if (!(n2 <= options.r_guard * options.r_guard))
            throw BlowUpError(u, i, std::sqrt(n2));

          double* out = store.at(i + 1, u);
          for (int k = 0; k < dims.state; ++k) out[k] = next[k];
          if (options.record_diagnostics) {
            double dsq = 0.0;
            for (int k = 0; k < dims.state; ++k) {
              const double dd = next[k] - x[k];
              dsq += dd * dd;
            }
            local_max = std::max(local_max, std::sqrt(dsq));
          }
        }
        if (options.record_diagnostics) chunk_max[static_cast<size_t>(chunk_of(lo))] = local_max;
      } catch (...) {
        std::lock_guard<std::mutex> lk(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
    if (failure) std::rethrow_exception(failure);

    if (options.record_diagnostics) {
      double m = 0.0;
      for (double v : chunk_max) m = std::max(m, v);
      diag.max_step_delta[static_cast<size_t>(i - grid.time_zero_index())] = m;
      diag.overall_max = std::max(diag.overall_max, m);
    }
  }
  return diag;
}

}  // namespace mfn
