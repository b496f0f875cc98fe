#include "mfn/sdde.hpp"

namespace mfn {

SddeCoefficients local_coefficients(const ModelPtr& model, Site site, Disorder disorder) {
  SddeCoefficients c;
  const ModelDims d = model->dims();
  c.state_dim = d.state;
  c.brownian_dim = d.brownian;
  c.nu_total = model->has_local_jumps() ? model->jump_intensity() : 0.0;
  c.f = [model, site, disorder](double t, const SegmentView& seg, Vec& out) {
    model->drift(t, site, seg.newest(), disorder, out);
  };
  c.g = [model, site, disorder](double t, const SegmentView& seg, Mat& out) {
    model->diffusion(t, site, seg.newest(), disorder, out);
  };
  if (model->has_local_jumps()) {
    c.h = [model, site, disorder](double t, const SegmentView& seg, double mark, Vec& out) {
      model->jump(t, site, seg.newest(), disorder, mark, out);
    };
    c.h_compensator = [model, site, disorder](double t, const SegmentView& seg, Vec& out) {
      model->jump_compensator(t, site, seg.newest(), disorder, out);
    };
    c.sample_mark = [model](CounterRng& rng) { return model->sample_mark(rng); };
  }
  return c;
}

SddeState euler_step(const SddeState& state, const SddeCoefficients& coeffs, const StepNoise& noise,
                     double t, double dt, double r_guard) {
  const int d = coeffs.state_dim;
  const SegmentView seg = state.segment();
  Vec next;
  euler_core_begin(state.current(), d, next);

  Vec tmp(d);
  coeffs.f(t, seg, tmp);
  next.axpy(dt, tmp);

  if (coeffs.g && noise.dW.size() > 0) {
    Mat g(d, coeffs.brownian_dim);
    coeffs.g(t, seg, g);
    g.apply_add(noise.dW.data(), next);
  }

  if (coeffs.h) {
    for (const auto& ev : noise.jumps) {
      tmp.set_zero();
      coeffs.h(t, seg, ev.mark, tmp);
      next += tmp;
    }
    tmp.set_zero();
    coeffs.h_compensator(t, seg, tmp);
    next.axpy(-dt, tmp);
  }

  euler_core_finish(next, r_guard, 0, state.step_index());
  SddeState advanced = state;
  advanced.push(next);
  return advanced;
}

namespace {

// In-place stepping shared by the trajectory and ensemble runners.
void run_path(const SddeCoefficients& coeffs, const TimeGrid& grid, const SddePathSpec& spec,
              SddeState& state, std::vector<JumpEvent>& jump_scratch,
              const std::function<void(int, const double*)>& commit) {
  const int d = coeffs.state_dim;
  const NoiseStreamKey w_key{spec.run_seed, StreamKind::w_local, spec.particle, 0, spec.replica};
  const NoiseStreamKey n_key{spec.run_seed, StreamKind::n_local, spec.particle, 0, spec.replica};

  StepNoise noise;
  noise.dW.resize(coeffs.brownian_dim);
  Vec next(d);
  Vec tmp(d);
  Mat g(d, coeffs.brownian_dim);
  const std::function<double(CounterRng&)> mark_sampler =
      coeffs.sample_mark ? coeffs.sample_mark : [](CounterRng&) { return 0.0; };

  for (int i = grid.time_zero_index(); i < grid.num_steps; ++i) {
    const double t = grid.time_of(i);
    const SegmentView seg = state.segment();

    euler_core_begin(state.current(), d, next);
    tmp.set_zero();
    coeffs.f(t, seg, tmp);
    next.axpy(grid.dt, tmp);

    if (coeffs.g) {
      brownian_increment(w_key, static_cast<uint32_t>(i), coeffs.brownian_dim, grid.dt,
                         noise.dW.data());
      g.set_zero();
      coeffs.g(t, seg, g);
      g.apply_add(noise.dW.data(), next);
    }

    if (coeffs.h && coeffs.nu_total > 0.0) {
      jump_events(n_key, static_cast<uint32_t>(i), coeffs.nu_total, grid.dt, t, mark_sampler,
                  jump_scratch);
      for (const auto& ev : jump_scratch) {
        tmp.set_zero();
        coeffs.h(t, seg, ev.mark, tmp);
        next += tmp;
      }
      tmp.set_zero();
      coeffs.h_compensator(t, seg, tmp);
      next.axpy(-grid.dt, tmp);
    }

    euler_core_finish(next, spec.r_guard, static_cast<int>(spec.particle), i);
    state.push(next);
    commit(i + 1, state.current());
  }
}

}  // namespace

Trajectory simulate_sdde(const SddeCoefficients& coeffs,
                         const std::function<void(CounterRng&, double*)>& initial_path,
                         const TimeGrid& grid, const SddePathSpec& spec) {
  Trajectory traj(grid, coeffs.state_dim);
  {
    const NoiseStreamKey init_key{spec.run_seed, StreamKind::init, spec.particle, 0, spec.replica};
    CounterRng rng = init_key.stream(0);
    initial_path(rng, traj.row(0));
  }
  SddeState state(grid, coeffs.state_dim, traj.row(0));
  std::vector<JumpEvent> scratch;
  run_path(coeffs, grid, spec, state, scratch, [&](int row, const double* x) {
    std::copy(x, x + coeffs.state_dim, traj.row(row));
  });
  return traj;
}

Trajectory simulate_sdde(const ModelPtr& model, const TimeGrid& grid, const Site& site,
                         const Disorder& disorder, const SddePathSpec& spec) {
  SddeCoefficients coeffs = local_coefficients(model, site, disorder);
  const int pop = site.population;
  return simulate_sdde(
      coeffs,
      [&model, pop, &grid](CounterRng& rng, double* rows) {
        model->sample_initial_path(pop, grid, rng, rows);
      },
      grid, spec);
}

MomentSeries simulate_sdde_ensemble(const ModelPtr& model, const TimeGrid& grid, const Site& site,
                                    const Disorder& disorder, uint64_t run_seed, int num_paths,
                                    double r_guard) {
  constexpr int kMomentChunk = 8192;  // fixed: results independent of threads
  const ModelDims dims = model->dims();
  const int rows = grid.rows();
  const int n_chunks = (num_paths + kMomentChunk - 1) / kMomentChunk;

  std::vector<MomentSeries> partial(static_cast<size_t>(n_chunks));
  std::exception_ptr failure;
  std::mutex failure_mutex;

  parallel_for(n_chunks, [&](int c) {
    try {
      MomentSeries acc;
      acc.dim = dims.state;
      acc.rows = rows;
      acc.component.resize(static_cast<size_t>(rows) * dims.state);
      acc.norm_sq.resize(static_cast<size_t>(rows));

      std::vector<double> init(static_cast<size_t>(grid.steps_per_delay + 1) * dims.state);
      std::vector<JumpEvent> scratch;
      SddeCoefficients coeffs = local_coefficients(model, site, disorder);

      const int lo = c * kMomentChunk;
      const int hi = std::min(num_paths, lo + kMomentChunk);
      for (int p = lo; p < hi; ++p) {
        SddePathSpec spec;
        spec.run_seed = run_seed;
        spec.particle = static_cast<uint32_t>(p);
        spec.r_guard = r_guard;

        const NoiseStreamKey init_key{run_seed, StreamKind::init, spec.particle, 0, 0};
        CounterRng rng = init_key.stream(0);
        model->sample_initial_path(site.population, grid, rng, init.data());

        auto record = [&](int row, const double* x) {
          double nsq = 0.0;
          for (int k = 0; k < dims.state; ++k) {
            acc.comp(row, k).add(x[k]);
            nsq += x[k] * x[k];
          }
          acc.norm_sq[static_cast<size_t>(row)].add(nsq);
        };
        for (int j = 0; j <= grid.steps_per_delay; ++j) record(j, init.data() + static_cast<size_t>(j) * dims.state);

        SddeState state(grid, dims.state, init.data());
        run_path(coeffs, grid, spec, state, scratch, record);
      }
      partial[static_cast<size_t>(c)] = std::move(acc);
    } catch (...) {
      std::lock_guard<std::mutex> lk(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  });
  if (failure) std::rethrow_exception(failure);

  MomentSeries total;
  total.dim = dims.state;
  total.rows = rows;
  total.component.resize(static_cast<size_t>(rows) * dims.state);
  total.norm_sq.resize(static_cast<size_t>(rows));
  for (const auto& acc : partial) {
    for (size_t i = 0; i < total.component.size(); ++i) total.component[i].merge(acc.component[i]);
    for (size_t i = 0; i < total.norm_sq.size(); ++i) total.norm_sq[i].merge(acc.norm_sq[i]);
  }
  return total;
}

}  // namespace mfn
