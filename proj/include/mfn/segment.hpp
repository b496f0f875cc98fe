#pragma once

#include <cmath>
#include <vector>

#include "mfn/errors.hpp"
#include "mfn/grid.hpp"
#include "mfn/vec.hpp"

namespace mfn {

// View of a delay-window sample: n+1 states of dimension dim, entry j holding
// the path value at offset -tau + j*dt (left-limit convention; the right
// limit at offset j is entry j+1, clamped at the last entry). Supports both
// contiguous storage and ring buffers via `capacity`.
class SegmentView {
 public:
  SegmentView() = default;
  SegmentView(const double* data, int dim, int count, int head = 0, int capacity = 0,
              int row_stride = 0)
      : data_(data),
        dim_(dim),
        count_(count),
        head_(head),
        capacity_(capacity > 0 ? capacity : count),
        stride_(row_stride > 0 ? row_stride : dim) {}

  int dim() const { return dim_; }
  int count() const { return count_; }  // n + 1

  const double* value(int j) const {
    int idx = head_ + j;
    if (idx >= capacity_) idx -= capacity_;
    return data_ + static_cast<size_t>(idx) * stride_;
  }
  // Right limit at offset j: the next grid entry (last entry maps to itself).
  const double* right_limit(int j) const { return value(j + 1 < count_ ? j + 1 : j); }

  const double* newest() const { return value(count_ - 1); }  // offset 0
  const double* oldest() const { return value(0); }           // offset -tau

  double component(int j, int k) const { return value(j)[k]; }

  Vec value_vec(int j) const {
    Vec v;
    v.assign(value(j), dim_);
    return v;
  }

  bool all_finite() const {
    for (int j = 0; j < count_; ++j) {
      const double* p = value(j);
      for (int k = 0; k < dim_; ++k)
        if (!std::isfinite(p[k])) return false;
    }
    return true;
  }

 private:
  const double* data_ = nullptr;
  int dim_ = 0;
  int count_ = 0;
  int head_ = 0;
  int capacity_ = 0;
  int stride_ = 0;
};

// Owning segment, convertible to a view. Used for initial paths and tests.
class PathBuffer {
 public:
  PathBuffer() = default;
  PathBuffer(int dim, int count) : dim_(dim), count_(count), data_(static_cast<size_t>(dim) * count, 0.0) {}

  int dim() const { return dim_; }
  int count() const { return count_; }
  double* row(int j) { return data_.data() + static_cast<size_t>(j) * dim_; }
  const double* row(int j) const { return data_.data() + static_cast<size_t>(j) * dim_; }
  void set_constant(const Vec& v) {
    for (int j = 0; j < count_; ++j)
      for (int k = 0; k < dim_; ++k) row(j)[k] = v[k];
  }
  SegmentView view() const { return SegmentView(data_.data(), dim_, count_); }

 private:
  int dim_ = 0;
  int count_ = 0;
  std::vector<double> data_;
};

// Probability measure on [-tau, 0] given by atoms; weights must sum to 1.
struct DelayMeasure {
  struct Atom {
    double offset = 0.0;  // in [-tau, 0]
    double weight = 1.0;
  };
  std::vector<Atom> atoms;

  static DelayMeasure point(double offset) { return DelayMeasure{{{offset, 1.0}}}; }

  void validate(double tau) const {
    double total = 0.0;
    for (const auto& a : atoms) {
      if (a.offset < -tau - 1e-12 || a.offset > 1e-12)
        throw ConfigError("delay_measure.offsets: atom outside [-tau, 0]");
      if (!(a.weight > 0.0)) throw ConfigError("delay_measure.weights: weights must be positive");
      total += a.weight;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw ConfigError("delay_measure.weights: weights must sum to 1");
  }

  // Resolve atoms to segment indices; atoms must sit on grid offsets.
  std::vector<std::pair<int, double>> grid_atoms(const TimeGrid& grid) const {
    validate(grid.tau);
    std::vector<std::pair<int, double>> out;
    out.reserve(atoms.size());
    for (const auto& a : atoms) {
      const double x = (a.offset + grid.tau) / grid.dt;
      const int j = static_cast<int>(std::lround(x));
      if (std::abs(x - j) > 1e-9 || j < 0 || j > grid.steps_per_delay)
        throw ConfigError("delay_measure.offsets: atom not on a grid offset");
      out.emplace_back(j, a.weight);
    }
    return out;
  }
};

// Integral over the delay window of |y_s|^2 + 1_{s<0}|y_{s+}|^2 (single
// segment) or of the squared differences (two segments).
inline double delay_integral(const SegmentView& seg, const SegmentView* other, const TimeGrid& grid,
                             const DelayMeasure& measure) {
  if (other != nullptr && (other->dim() != seg.dim() || other->count() != seg.count()))
    throw ShapeError("delay_integral: segments disagree in shape");
  if (seg.count() != grid.steps_per_delay + 1)
    throw ShapeError("delay_integral: segment length does not match the grid");
  const auto atoms = measure.grid_atoms(grid);
  const int last = seg.count() - 1;
  const int d = seg.dim();
  double total = 0.0;
  for (const auto& [j, w] : atoms) {
    double here = 0.0;
    double right = 0.0;
    const double* a = seg.value(j);
    const double* ar = seg.right_limit(j);
    if (other == nullptr) {
      for (int k = 0; k < d; ++k) {
        here += a[k] * a[k];
        right += ar[k] * ar[k];
      }
    } else {
      const double* b = other->value(j);
      const double* br = other->right_limit(j);
      for (int k = 0; k < d; ++k) {
        const double dv = a[k] - b[k];
        const double dr = ar[k] - br[k];
        here += dv * dv;
        right += dr * dr;
      }
    }
    total += w * (here + (j < last ? right : 0.0));
  }
  return total;
}

}  // namespace mfn
