#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstring>

namespace mfn {

// Inline fixed-capacity vector for state-space math (d <= kMaxDim).
// Avoids heap traffic in the per-step hot loops.
inline constexpr int kMaxDim = 8;

class Vec {
 public:
  Vec() = default;
  explicit Vec(int n) { resize(n); }
  Vec(std::initializer_list<double> xs) {
    assert(static_cast<int>(xs.size()) <= kMaxDim);
    n_ = static_cast<int>(xs.size());
    std::copy(xs.begin(), xs.end(), v_);
  }

  int size() const { return n_; }
  void resize(int n) {
    assert(n >= 0 && n <= kMaxDim);
    n_ = n;
    std::fill(v_, v_ + n_, 0.0);
  }
  double& operator[](int i) { return v_[i]; }
  double operator[](int i) const { return v_[i]; }
  double* data() { return v_; }
  const double* data() const { return v_; }

  void set_zero() { std::fill(v_, v_ + n_, 0.0); }
  void assign(const double* p, int n) {
    assert(n <= kMaxDim);
    n_ = n;
    std::memcpy(v_, p, sizeof(double) * static_cast<size_t>(n));
  }

  Vec& operator+=(const Vec& o) {
    assert(o.n_ == n_);
    for (int i = 0; i < n_; ++i) v_[i] += o.v_[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    assert(o.n_ == n_);
    for (int i = 0; i < n_; ++i) v_[i] -= o.v_[i];
    return *this;
  }
  Vec& operator*=(double a) {
    for (int i = 0; i < n_; ++i) v_[i] *= a;
    return *this;
  }
  // this += a * o
  void axpy(double a, const Vec& o) {
    assert(o.n_ == n_);
    for (int i = 0; i < n_; ++i) v_[i] += a * o.v_[i];
  }

  double squared_norm() const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += v_[i] * v_[i];
    return s;
  }
  double norm() const { return std::sqrt(squared_norm()); }

  friend double dot(const Vec& a, const Vec& b) {
    assert(a.n_ == b.n_);
    double s = 0.0;
    for (int i = 0; i < a.n_; ++i) s += a.v_[i] * b.v_[i];
    return s;
  }
  friend Vec operator-(const Vec& a, const Vec& b) {
    Vec r = a;
    r -= b;
    return r;
  }
  friend Vec operator+(const Vec& a, const Vec& b) {
    Vec r = a;
    r += b;
    return r;
  }

  bool all_finite() const {
    for (int i = 0; i < n_; ++i)
      if (!std::isfinite(v_[i])) return false;
    return true;
  }

 private:
  double v_[kMaxDim] = {};
  int n_ = 0;
};

// Row-major matrix, rows x cols <= kMaxDim each.
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols) { resize(rows, cols); }

  void resize(int rows, int cols) {
    assert(rows >= 0 && rows <= kMaxDim && cols >= 0 && cols <= kMaxDim);
    r_ = rows;
    c_ = cols;
    std::fill(v_, v_ + r_ * c_, 0.0);
  }
  int rows() const { return r_; }
  int cols() const { return c_; }
  double& operator()(int i, int j) { return v_[i * c_ + j]; }
  double operator()(int i, int j) const { return v_[i * c_ + j]; }
  void set_zero() { std::fill(v_, v_ + r_ * c_, 0.0); }

  Mat& operator+=(const Mat& o) {
    assert(o.r_ == r_ && o.c_ == c_);
    for (int i = 0; i < r_ * c_; ++i) v_[i] += o.v_[i];
    return *this;
  }
  void axpy(double a, const Mat& o) {
    assert(o.r_ == r_ && o.c_ == c_);
    for (int i = 0; i < r_ * c_; ++i) v_[i] += a * o.v_[i];
  }

  // out += M * x
  void apply_add(const double* x, Vec& out) const {
    assert(out.size() == r_);
    for (int i = 0; i < r_; ++i) {
      double s = 0.0;
      for (int j = 0; j < c_; ++j) s += v_[i * c_ + j] * x[j];
      out[i] += s;
    }
  }

  double squared_frobenius() const {
    double s = 0.0;
    for (int i = 0; i < r_ * c_; ++i) s += v_[i] * v_[i];
    return s;
  }

 private:
  double v_[kMaxDim * kMaxDim] = {};
  int r_ = 0;
  int c_ = 0;
};

// Spatial position in Gamma subset of R^k, k <= 3.
struct Pos {
  double x[3] = {0.0, 0.0, 0.0};
  int dim = 1;

  double operator[](int i) const { return x[i]; }
  double& operator[](int i) { return x[i]; }

  static Pos scalar(double v) {
    Pos p;
    p.dim = 1;
    p.x[0] = v;
    return p;
  }
};

}  // namespace mfn
