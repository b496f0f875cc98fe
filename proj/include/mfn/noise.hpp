#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mfn/errors.hpp"
#include "mfn/philox.hpp"
#include "mfn/vec.hpp"

namespace mfn {

// Stream roles. A key addresses one independent noise source of the model:
// W^r (w_local), B^{r,alpha} (b_pop), N^r (n_local), N^{r,alpha} (n_pop),
// initial-path draws (init), disorder draws (disorder), and the mean-field
// copy lane's initial paths (copy_init).
enum class StreamKind : uint32_t {
  w_local = 0,
  b_pop = 1,
  n_local = 2,
  n_pop = 3,
  init = 4,
  disorder = 5,
  copy_init = 6,
};

// Identifies one noise stream. Distinct keys yield independent streams; the
// same key replays the same sequence regardless of evaluation order.
struct NoiseStreamKey {
  uint64_t run_seed = 0;
  StreamKind kind = StreamKind::w_local;
  uint32_t particle = 0;
  uint32_t population = 0;  // 0 when unused
  uint32_t replica = 0;     // 0 = primary/coupled lane, >=1 = copy lanes

  // The key fields map injectively onto the Philox counter words; the run
  // seed is the cipher key. population < 2^9, replica < 2^20.
  CounterRng stream(uint32_t step_index) const {
    if (population >= (1u << 9)) throw ConfigError("noise: population index out of range");
    if (replica >= (1u << 20)) throw ConfigError("noise: replica index out of range");
    const uint32_t c3 =
        (static_cast<uint32_t>(kind) << 29) | (population << 20) | replica;
    return CounterRng(run_seed, step_index, particle, c3);
  }
};

struct JumpEvent {
  double time = 0.0;  // within (t, t+dt]
  double mark = 0.0;
};

// dim iid N(0, dt) increments, deterministic in (key, step_index).
inline void brownian_increment(const NoiseStreamKey& key, uint32_t step_index, int dim, double dt,
                               double* out) {
  if (dim <= 0) throw ShapeError("brownian_increment: dim must be positive");
  CounterRng rng = key.stream(step_index);
  const double s = std::sqrt(dt);
  for (int i = 0; i < dim; ++i) out[i] = s * rng.next_normal();
}

inline Vec brownian_increment(const NoiseStreamKey& key, uint32_t step_index, int dim, double dt) {
  Vec v(dim);
  brownian_increment(key, step_index, dim, dt, v.data());
  return v;
}

// Jump events of one step: count ~ Poisson(nu_total*dt), times uniform in
// the step, marks drawn by `sample_mark` from the normalized mark law.
inline void jump_events(const NoiseStreamKey& key, uint32_t step_index, double nu_total, double dt,
                        double t_left, const std::function<double(CounterRng&)>& sample_mark,
                        std::vector<JumpEvent>& out) {
  out.clear();
  if (nu_total <= 0.0) return;
  CounterRng rng = key.stream(step_index);
  const int count = rng.next_poisson(nu_total * dt);
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    JumpEvent e;
    e.time = t_left + dt * rng.next_unit_pos();
    e.mark = sample_mark(rng);
    out.push_back(e);
  }
}

// sum_events integrand(mark) - compensator * dt, the one-step increment of
// the compensated jump integral.
inline Vec compensated_jump_sum(const std::vector<JumpEvent>& events,
                                const std::function<void(double, Vec&)>& integrand,
                                const Vec& compensator, double dt) {
  Vec total(compensator.size());
  Vec tmp(compensator.size());
  for (const auto& e : events) {
    tmp.set_zero();
    integrand(e.mark, tmp);
    total += tmp;
  }
  total.axpy(-dt, compensator);
  return total;
}

}  // namespace mfn
