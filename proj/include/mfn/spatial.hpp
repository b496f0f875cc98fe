#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mfn/errors.hpp"
#include "mfn/vec.hpp"

namespace mfn {

// Axis-aligned box, half-open on the upper face.
struct Box {
  Pos lo;
  Pos hi;

  bool contains(const Pos& p) const {
    for (int i = 0; i < p.dim; ++i)
      if (p[i] < lo[i] || p[i] >= hi[i]) return false;
    return true;
  }
  Pos midpoint() const {
    Pos m = lo;
    for (int i = 0; i < lo.dim; ++i) m[i] = 0.5 * (lo[i] + hi[i]);
    return m;
  }
  double width(int axis) const { return hi[axis] - lo[axis]; }
};

struct Cell {
  Box box;
  double mass = 0.0;  // R(cell)
};

struct Population {
  std::vector<Cell> cells;
  double weight = 0.0;  // S_{A_N,alpha}; defaults to the particle count
  double total_mass = 1.0;
  int count = 0;  // #(A_N cap Gamma_alpha)
};

// One neuron site: position tagged with its subpopulation and cell.
// cell_frac is the relative position along the cell's first axis; models
// with within-cell parameter gradients read it instead of inverting boxes.
struct Site {
  Pos pos;
  int population = 0;
  int cell = 0;
  int index = 0;  // global particle index
  double cell_frac = 0.5;
};

struct CellRatio {
  int population = 0;
  int cell = 0;
  double ratio = 0.0;  // count / S
  double mass = 0.0;   // R(cell)
};

class SpatialLayout {
 public:
  int populations() const { return static_cast<int>(pops_.size()); }
  const Population& population(int a) const { return pops_[a]; }
  const std::vector<Site>& sites() const { return sites_; }
  int num_sites() const { return static_cast<int>(sites_.size()); }
  const Cell& cell(int a, int m) const { return pops_[a].cells[m]; }
  int num_cells(int a) const { return static_cast<int>(pops_[a].cells.size()); }

  void add_population(Population p) { pops_.push_back(std::move(p)); }
  void add_site(Site s) {
    s.index = static_cast<int>(sites_.size());
    sites_.push_back(s);
  }
  void set_weight(int a, double s) {
    if (s == 0.0) throw ConfigError("layout.weights: S must be nonzero");
    pops_[a].weight = s;
  }

  // Checks the type invariants: positions inside their declared cell and no
  // other, weights nonzero, masses consistent.
  void validate() const {
    if (pops_.empty()) throw ConfigError("layout.populations: at least one subpopulation required");
    for (size_t a = 0; a < pops_.size(); ++a) {
      const auto& p = pops_[a];
      if (p.cells.empty()) throw ConfigError("layout.cells: population without refinement cells");
      if (p.weight == 0.0) throw ConfigError("layout.weights: S must be nonzero");
      double mass = 0.0;
      for (const auto& c : p.cells) {
        if (c.mass < 0.0) throw ConfigError("layout.masses: cell mass must be nonnegative");
        mass += c.mass;
      }
      if (std::abs(mass - p.total_mass) > 1e-9)
        throw ConfigError("layout.masses: cell masses must sum to the population mass");
    }
    for (const auto& s : sites_) {
      if (s.population < 0 || s.population >= populations())
        throw ConfigError("layout.positions: site references unknown population");
      int owner = -1;
      for (int a = 0; a < populations(); ++a)
        for (int m = 0; m < num_cells(a); ++m)
          if (pops_[a].cells[m].box.contains(s.pos)) {
            if (owner != -1) throw ConfigError("layout.cells: cells overlap at a site position");
            owner = a * 1024 + m;
          }
      if (owner != s.population * 1024 + s.cell)
        throw ConfigError("layout.positions: site not contained in its declared cell");
    }
  }

  // Density ratios of Hypothesis-style cell counts against cell masses.
  std::vector<CellRatio> ratio_audit() const {
    std::vector<CellRatio> out;
    for (int a = 0; a < populations(); ++a) {
      std::vector<int> counts(pops_[a].cells.size(), 0);
      for (const auto& s : sites_)
        if (s.population == a) ++counts[s.cell];
      for (int m = 0; m < num_cells(a); ++m)
        out.push_back({a, m, counts[m] / pops_[a].weight, pops_[a].cells[m].mass});
    }
    return out;
  }

  // sum_alpha count_alpha^2 / S_alpha^2, the weight statistic entering the
  // disorder-integrability audit.
  double weight_bound() const {
    double s = 0.0;
    for (const auto& p : pops_) {
      const double q = p.count / p.weight;
      s += q * q;
    }
    return s;
  }

  // Deterministic lattice layout: population alpha occupies [alpha, alpha+1)
  // on the line, split into `cells_per_pop` equal-mass cells; `count` sites
  // per population are assigned round-robin to cells and evenly spaced
  // within each cell. S defaults to the per-population count.
  static SpatialLayout lattice(int populations, int count_per_pop, int cells_per_pop,
                               double total_mass = 1.0) {
    if (populations < 1) throw ConfigError("layout.populations: must be >= 1");
    if (count_per_pop < 1) throw ConfigError("layout.count: must be >= 1");
    if (cells_per_pop < 1) throw ConfigError("layout.cells: must be >= 1");
    SpatialLayout lay;
    for (int a = 0; a < populations; ++a) {
      Population p;
      p.total_mass = total_mass;
      const double w = 1.0 / cells_per_pop;
      for (int m = 0; m < cells_per_pop; ++m) {
        Cell c;
        c.box.lo = Pos::scalar(a + m * w);
        c.box.hi = Pos::scalar(a + (m + 1) * w);
        c.mass = total_mass / cells_per_pop;
        p.cells.push_back(c);
      }
      p.count = count_per_pop;
      p.weight = count_per_pop;
      lay.add_population(p);
    }
    for (int a = 0; a < populations; ++a) {
      std::vector<int> fill(cells_per_pop, 0);
      std::vector<int> per_cell(cells_per_pop, 0);
      for (int i = 0; i < count_per_pop; ++i) ++per_cell[i % cells_per_pop];
      for (int i = 0; i < count_per_pop; ++i) {
        const int m = i % cells_per_pop;
        const auto& box = lay.cell(a, m).box;
        Site s;
        s.population = a;
        s.cell = m;
        s.cell_frac = (fill[m] + 0.5) / per_cell[m];
        s.pos = Pos::scalar(box.lo[0] + s.cell_frac * box.width(0));
        ++fill[m];
        lay.add_site(s);
      }
    }
    lay.validate();
    return lay;
  }

 private:
  std::vector<Population> pops_;
  std::vector<Site> sites_;
};

}  // namespace mfn
