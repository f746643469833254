#ifndef CAYLEY_TREE_ORACLE_HPP
#define CAYLEY_TREE_ORACLE_HPP

// Brute-force finite-volume checks on the Cayley tree of order two: the
// Hamiltonian on V_n, the boundary-field measures mu^(n) on the uniform
// trapezoid grid, and the marginal compatibility of mu^(n) with mu^(n-1).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "cayley/kernel.hpp"
#include "cayley/quadrature.hpp"
#include "cayley/solver.hpp"

namespace cayley {

struct TreeVertex {
  int level = 0;
  int parent = -1;
  std::vector<int> children;  // S(x)
};

/// Two siblings sharing `middle` as parent.
struct NeighborTriple {
  int middle = 0;
  int left = 0;
  int right = 0;
};

/// V_depth of the order-two Cayley tree, vertices indexed breadth-first so
/// that V_l is the prefix [0, level_end(l)).
struct CayleyTree {
  int k = 2;
  int depth = 0;
  std::vector<TreeVertex> vertices;
  std::vector<std::vector<int>> levels;                 // W_0 .. W_depth
  std::vector<std::pair<int, int>> edges;               // (parent, child)
  std::vector<std::pair<int, int>> second_pairs;        // (left, right) siblings
  std::vector<NeighborTriple> triples;

  std::size_t size() const noexcept { return vertices.size(); }

  /// Number of vertices in V_level.
  std::size_t level_end(int level) const {
    if (level < 0 || level > depth) throw std::out_of_range("CayleyTree::level_end");
    std::size_t n = 0;
    for (int l = 0; l <= level; ++l) n += levels[static_cast<std::size_t>(l)].size();
    return n;
  }

  /// Level l such that V_l has exactly `count` vertices.
  int level_for_size(std::size_t count) const {
    for (int l = 0; l <= depth; ++l)
      if (level_end(l) == count) return l;
    throw std::invalid_argument("CayleyTree: configuration size does not match any V_n");
  }
};

inline CayleyTree build_tree(int depth) {
  if (depth < 1 || depth > 3) throw std::invalid_argument("build_tree: depth must lie in [1, 3]");
  CayleyTree tree;
  tree.depth = depth;
  tree.vertices.push_back({0, -1, {}});
  tree.levels.push_back({0});
  for (int l = 1; l <= depth; ++l) {
    std::vector<int> next;
    for (int x : tree.levels.back()) {
      const int n_children = x == 0 ? tree.k + 1 : tree.k;
      for (int c = 0; c < n_children; ++c) {
        const int id = static_cast<int>(tree.vertices.size());
        tree.vertices.push_back({l, x, {}});
        tree.vertices[static_cast<std::size_t>(x)].children.push_back(id);
        tree.edges.emplace_back(x, id);
        next.push_back(id);
      }
      const auto& ch = tree.vertices[static_cast<std::size_t>(x)].children;
      for (std::size_t a = 0; a < ch.size(); ++a)
        for (std::size_t b = a + 1; b < ch.size(); ++b) {
          tree.second_pairs.emplace_back(ch[a], ch[b]);
          tree.triples.push_back({x, ch[a], ch[b]});
        }
    }
    tree.levels.push_back(std::move(next));
  }
  return tree;
}

/// Spin values sigma(x) for the vertices of some V_n, in tree index order.
struct DiscreteConfig {
  std::vector<double> spins;
};

/// H(sigma) = -J3 sum xi1(mid, left, right) - J sum xi2(left, right)
///            - J1 sum xi3(parent, child) - alpha sum sigma(x)
/// over the structures contained in the V_n covered by sigma.
inline double hamiltonian(const CayleyTree& tree, const DiscreteConfig& sigma, const CouplingParams& params,
                          const Interactions& xi) {
  const int level = tree.level_for_size(sigma.spins.size());
  const auto in = [&](int v) { return tree.vertices[static_cast<std::size_t>(v)].level <= level; };
  const auto s = [&](int v) { return sigma.spins[static_cast<std::size_t>(v)]; };
  double h = 0.0;
  if (params.J3 != 0.0)
    for (const auto& t : tree.triples)
      if (in(t.right)) h -= params.J3 * xi.xi1(s(t.middle), s(t.left), s(t.right));
  if (params.J != 0.0)
    for (const auto& [a, b] : tree.second_pairs)
      if (in(b)) h -= params.J * xi.xi2(s(a), s(b));
  if (params.J1 != 0.0)
    for (const auto& [p, c] : tree.edges)
      if (in(c)) h -= params.J1 * xi.xi3(s(p), s(c));
  if (params.alpha != 0.0)
    for (double x : sigma.spins) h -= params.alpha * x;
  return h;
}

/// h(t, x) tabulated on the oracle grid for every vertex x != root.
struct BoundaryField {
  std::vector<double> grid;
  std::vector<std::vector<double>> table;  // [vertex][grid index]; root row unused

  double at(int vertex, std::size_t grid_index) const {
    return table[static_cast<std::size_t>(vertex)][grid_index];
  }

  static BoundaryField translation_invariant(const CayleyTree& tree, const std::vector<double>& grid,
                                             const std::function<double(double)>& h) {
    BoundaryField field;
    field.grid = grid;
    std::vector<double> row(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      row[i] = h(grid[i]);
      if (!std::isfinite(row[i])) throw std::invalid_argument("BoundaryField: h must be finite on the grid");
    }
    field.table.assign(tree.size(), row);
    return field;
  }

  static BoundaryField zero(const CayleyTree& tree, const std::vector<double>& grid) {
    return translation_invariant(tree, grid, [](double) { return 0.0; });
  }
};

/// Thrown when a tabulated measure would exceed the configured size cap.
class TableTooLarge : public std::length_error {
 public:
  using std::length_error::length_error;
};

namespace detail {

inline std::uint64_t checked_power(std::uint64_t base, std::size_t exponent, std::uint64_t cap) {
  std::uint64_t r = 1;
  for (std::size_t i = 0; i < exponent; ++i) {
    if (r > cap / base) return cap + 1;
    r *= base;
  }
  return r;
}

// One multiplicative factor exp(...) attached to the highest-index vertex
// it touches. `others` are the remaining participants, in table order.
struct LocalFactor {
  std::vector<int> others;
  std::vector<double> table;  // row-major over (others..., self)
};

// Factor tables of exp(-beta H) on the grid for the structures inside V_level,
// plus the unary field factor. Boundary terms and quadrature weights are
// applied by the caller.
class FactorGraph {
 public:
  FactorGraph(const CayleyTree& tree, int level, const CouplingParams& p, const Interactions& xi,
              const std::vector<double>& grid)
      : m_(grid.size()), factors_(tree.level_end(level)), field_(grid.size()) {
    const std::size_t m = m_;
    const double b = p.beta;
    const auto in = [&](int v) { return tree.vertices[static_cast<std::size_t>(v)].level <= level; };
    for (std::size_t a = 0; a < m; ++a) field_[a] = std::exp(p.alpha * b * grid[a]);
    if (p.J1 != 0.0) {
      for (const auto& [par, c] : tree.edges) {
        if (!in(c)) continue;
        LocalFactor f{{par}, std::vector<double>(m * m)};
        for (std::size_t a = 0; a < m; ++a)
          for (std::size_t s = 0; s < m; ++s) f.table[a * m + s] = std::exp(p.J1 * b * xi.xi3(grid[a], grid[s]));
        factors_[static_cast<std::size_t>(c)].push_back(std::move(f));
      }
    }
    if (p.J != 0.0) {
      for (const auto& [l, r] : tree.second_pairs) {
        if (!in(r)) continue;
        LocalFactor f{{l}, std::vector<double>(m * m)};
        for (std::size_t a = 0; a < m; ++a)
          for (std::size_t s = 0; s < m; ++s) f.table[a * m + s] = std::exp(p.J * b * xi.xi2(grid[a], grid[s]));
        factors_[static_cast<std::size_t>(r)].push_back(std::move(f));
      }
    }
    if (p.J3 != 0.0) {
      for (const auto& t : tree.triples) {
        if (!in(t.right)) continue;
        LocalFactor f{{t.middle, t.left}, std::vector<double>(m * m * m)};
        for (std::size_t a = 0; a < m; ++a)
          for (std::size_t c = 0; c < m; ++c)
            for (std::size_t s = 0; s < m; ++s)
              f.table[(a * m + c) * m + s] = std::exp(p.J3 * b * xi.xi1(grid[a], grid[c], grid[s]));
        factors_[static_cast<std::size_t>(t.right)].push_back(std::move(f));
      }
    }
  }

  /// Product of the factors owned by vertex v given grid indices of all
  /// lower-indexed vertices and idx[v] itself.
  double vertex_factor(int v, const std::vector<std::size_t>& idx) const {
    const auto vi = static_cast<std::size_t>(v);
    double prod = field_[idx[vi]];
    for (const auto& f : factors_[vi]) {
      std::size_t pos = 0;
      for (int o : f.others) pos = pos * m_ + idx[static_cast<std::size_t>(o)];
      prod *= f.table[pos * m_ + idx[vi]];
    }
    return prod;
  }

 private:
  std::size_t m_;
  std::vector<std::vector<LocalFactor>> factors_;
  std::vector<double> field_;
};

inline void decode_config(std::uint64_t code, std::size_t m, std::size_t count, std::vector<std::size_t>& idx) {
  for (std::size_t v = 0; v < count; ++v) {
    idx[v] = static_cast<std::size_t>(code % m);
    code /= m;
  }
}

}  // namespace detail

/// Density table of mu^(level) with respect to the product of trapezoid
/// weights. Config index = sum_v idx_v m^v (vertex 0 least significant).
struct DensityTable {
  int level = 0;
  RulePtr grid;
  std::vector<double> density;
  double partition_function = 0.0;

  double at(const std::vector<std::size_t>& idx) const {
    std::uint64_t code = 0;
    for (std::size_t v = idx.size(); v-- > 0;) code = code * grid->size() + idx[v];
    return density[code];
  }
};

/// mu^(n)(sigma) = Z^-1 exp(-beta H(sigma) + sum_{x in W_n} h(sigma(x), x)) on
/// the m-point grid for n = level (defaults to tree.depth). Rejects tables
/// larger than `cap` entries; use StreamingMeasure for those.
inline DensityTable mu_n(const CayleyTree& tree, const CouplingParams& params, const Interactions& xi,
                         const BoundaryField& h, int m, int level = -1, std::uint64_t cap = 1u << 24) {
  params.validate();
  if (m < 2) throw std::invalid_argument("mu_n: grid must have m >= 2 points");
  if (level < 0) level = tree.depth;
  if (level < 1) throw std::invalid_argument("mu_n: level must be >= 1");
  const std::size_t count = tree.level_end(level);
  const std::uint64_t entries = detail::checked_power(static_cast<std::uint64_t>(m), count, cap);
  if (entries > cap)
    throw TableTooLarge("mu_n: m^|V_n| exceeds the table cap; evaluate densities with StreamingMeasure");
  DensityTable out;
  out.level = level;
  out.grid = trapezoid_rule(m);
  if (h.grid.size() != static_cast<std::size_t>(m)) throw std::invalid_argument("mu_n: boundary field grid mismatch");
  const detail::FactorGraph fg(tree, level, params, xi, out.grid->nodes);
  const auto& outer = tree.levels[static_cast<std::size_t>(level)];
  out.density.resize(entries);
  std::vector<std::size_t> idx(count);
  double z = 0.0;
  for (std::uint64_t code = 0; code < entries; ++code) {
    detail::decode_config(code, static_cast<std::size_t>(m), count, idx);
    double w = 1.0;
    double weight = 1.0;
    for (std::size_t v = 0; v < count; ++v) {
      w *= fg.vertex_factor(static_cast<int>(v), idx);
      weight *= out.grid->weights[idx[v]];
    }
    double hsum = 0.0;
    for (int x : outer) hsum += h.at(x, idx[static_cast<std::size_t>(x)]);
    w *= std::exp(hsum);
    out.density[code] = w;
    z += weight * w;
  }
  for (auto& d : out.density) d /= z;
  out.partition_function = z;
  return out;
}

/// Density of mu^(n) evaluated on demand; the partition function is summed
/// once by streaming enumeration.
class StreamingMeasure {
 public:
  StreamingMeasure(const CayleyTree& tree, const CouplingParams& params, const Interactions& xi,
                   const BoundaryField& h, int m, int level = -1)
      : tree_(tree), params_(params), xi_(xi), h_(h), grid_(trapezoid_rule(m)) {
    params_.validate();
    level_ = level < 0 ? tree.depth : level;
    count_ = tree.level_end(level_);
    const detail::FactorGraph fg(tree_, level_, params_, xi_, grid_->nodes);
    std::vector<std::size_t> idx(count_);
    z_ = sum_from(fg, 0, idx, 1.0);
  }

  double partition_function() const noexcept { return z_; }

  double unnormalized(const std::vector<std::size_t>& idx) const {
    DiscreteConfig sigma;
    sigma.spins.resize(count_);
    for (std::size_t v = 0; v < count_; ++v) sigma.spins[v] = grid_->nodes[idx[v]];
    double e = -params_.beta * hamiltonian(tree_, sigma, params_, xi_);
    for (int x : tree_.levels[static_cast<std::size_t>(level_)]) e += h_.at(x, idx[static_cast<std::size_t>(x)]);
    return std::exp(e);
  }

  double density(const std::vector<std::size_t>& idx) const { return unnormalized(idx) / z_; }

 private:
  double sum_from(const detail::FactorGraph& fg, std::size_t v, std::vector<std::size_t>& idx, double prod) const {
    if (v == count_) return prod;
    const bool outer = tree_.vertices[v].level == level_;
    double s = 0.0;
    for (std::size_t a = 0; a < grid_->size(); ++a) {
      idx[v] = a;
      double f = grid_->weights[a] * fg.vertex_factor(static_cast<int>(v), idx);
      if (outer) f *= std::exp(h_.at(static_cast<int>(v), a));
      s += sum_from(fg, v + 1, idx, prod * f);
    }
    return s;
  }

  const CayleyTree& tree_;
  CouplingParams params_;
  Interactions xi_;
  BoundaryField h_;
  RulePtr grid_;
  int level_ = 0;
  std::size_t count_ = 0;
  double z_ = 0.0;
};

struct CompatibilityReport {
  int depth = 0;
  int grid = 0;
  double residual = 0.0;          // max |marginal of mu^(n) - mu^(n-1)|
  std::uint64_t samples = 0;      // sigma_{n-1} configurations compared
  double partition_n = 0.0;
  double partition_n_minus_1 = 0.0;
  bool root_parents_excluded = true;  // only non-root parents have W_n children when n >= 2
};

/// max over all sigma_{n-1} grid configurations of
///   | sum_{omega_n} w(omega_n) mu^(n)(sigma_{n-1} v omega_n) - mu^(n-1)(sigma_{n-1}) |
/// for n = tree.depth, with the single product measure over omega_n. The
/// omega_n sums are brute-force enumerations; outer configurations are split
/// across threads and reduced in index order.
inline CompatibilityReport compatibility_residual(const CayleyTree& tree, const CouplingParams& params,
                                                  const Interactions& xi, const BoundaryField& h, int m,
                                                  std::uint64_t enumeration_cap = 4'000'000'000ULL,
                                                  unsigned threads = 0) {
  params.validate();
  const int n = tree.depth;
  if (n < 2) throw std::invalid_argument("compatibility_residual: tree depth must be >= 2");
  if (m < 2) throw std::invalid_argument("compatibility_residual: grid must have m >= 2 points");
  if (h.grid.size() != static_cast<std::size_t>(m))
    throw std::invalid_argument("compatibility_residual: boundary field grid mismatch");
  const std::size_t inner_end = tree.level_end(n);
  const std::size_t outer_end = tree.level_end(n - 1);
  const auto mm = static_cast<std::uint64_t>(m);
  if (detail::checked_power(mm, inner_end, enumeration_cap) > enumeration_cap)
    throw TableTooLarge("compatibility_residual: m^|V_n| exceeds the enumeration cap");
  const std::uint64_t outer_count = detail::checked_power(mm, outer_end, enumeration_cap);

  const auto rule = trapezoid_rule(m);
  const detail::FactorGraph fg(tree, n, params, xi, rule->nodes);
  const auto& w = rule->weights;

  // per outer configuration: P(sigma) * prod w, inner marginal sum, mu^(n-1) weight
  std::vector<double> outer_weight(outer_count), marginal(outer_count), previous(outer_count);

  // w(a) exp(h(a, x)) for every outer vertex x in W_n
  std::vector<std::vector<double>> boundary(inner_end);
  for (std::size_t v = outer_end; v < inner_end; ++v) {
    boundary[v].resize(rule->size());
    for (std::size_t a = 0; a < rule->size(); ++a) boundary[v][a] = w[a] * std::exp(h.at(static_cast<int>(v), a));
  }

  struct InnerSum {
    const detail::FactorGraph& fg;
    const std::vector<std::vector<double>>& boundary;
    std::size_t end;
    std::size_t m;
    std::vector<std::size_t>& idx;
    double operator()(std::size_t v, double prod) const {
      if (v == end) return prod;
      double s = 0.0;
      for (std::size_t a = 0; a < m; ++a) {
        idx[v] = a;
        s += (*this)(v + 1, prod * boundary[v][a] * fg.vertex_factor(static_cast<int>(v), idx));
      }
      return s;
    }
  };

  const auto work = [&](std::uint64_t begin, std::uint64_t end) {
    std::vector<std::size_t> idx(inner_end);
    const InnerSum inner{fg, boundary, inner_end, rule->size(), idx};
    for (std::uint64_t code = begin; code < end; ++code) {
      detail::decode_config(code, rule->size(), outer_end, idx);
      double p = 1.0;
      double wt = 1.0;
      for (std::size_t v = 0; v < outer_end; ++v) {
        p *= fg.vertex_factor(static_cast<int>(v), idx);
        wt *= w[idx[v]];
      }
      double hsum = 0.0;
      for (int x : tree.levels[static_cast<std::size_t>(n - 1)]) hsum += h.at(x, idx[static_cast<std::size_t>(x)]);
      outer_weight[code] = wt;
      marginal[code] = p * inner(outer_end, 1.0);
      previous[code] = p * std::exp(hsum);
    }
  };

  unsigned nthreads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  nthreads = static_cast<unsigned>(std::min<std::uint64_t>(nthreads, outer_count));
  std::vector<std::thread> pool;
  const std::uint64_t chunk = (outer_count + nthreads - 1) / nthreads;
  for (unsigned t = 0; t < nthreads; ++t) {
    const std::uint64_t b = t * chunk;
    const std::uint64_t e = std::min(outer_count, b + chunk);
    if (b < e) pool.emplace_back(work, b, e);
  }
  for (auto& th : pool) th.join();

  double zn = 0.0;
  double zp = 0.0;
  for (std::uint64_t c = 0; c < outer_count; ++c) {
    zn += outer_weight[c] * marginal[c];
    zp += outer_weight[c] * previous[c];
  }
  CompatibilityReport r;
  r.depth = n;
  r.grid = m;
  r.samples = outer_count;
  r.partition_n = zn;
  r.partition_n_minus_1 = zp;
  for (std::uint64_t c = 0; c < outer_count; ++c)
    r.residual = std::max(r.residual, std::abs(marginal[c] / zn - previous[c] / zp));
  return r;
}

/// How the solver-produced field is discretized: solved directly on the
/// oracle's trapezoid grid, or solved on Gauss nodes and extended to the
/// grid with the Nystrom formula.
enum class FieldSource { oracle_grid, nystrom };

/// h = ln f for the translation-invariant solution f of the fixed-point
/// equation, tabulated on the m-point trapezoid grid.
inline BoundaryField solver_boundary_field(const CayleyTree& tree, const Kernel& k, int m, const SolverConfig& cfg,
                                           FieldSource source = FieldSource::oracle_grid, int nodes = 64) {
  const auto grid = trapezoid_rule(m);
  FixedPointResult r;
  if (source == FieldSource::oracle_grid) {
    const DiscreteOperator op(k, grid);
    r = solve_translation_invariant(op, cfg, GridFunction::constant(grid, 1.0));
    if (!r.ok() && cfg.newton_fallback) r = refine_newton(op, GridFunction::constant(grid, 1.0), cfg);
    if (!r.ok()) throw std::runtime_error("solver_boundary_field: solver failed: " + to_string(r.status));
    const auto f = r.point.f;
    std::vector<double> lnf(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) lnf[i] = std::log(f.values[i]);
    BoundaryField field;
    field.grid = grid->nodes;
    field.table.assign(tree.size(), lnf);
    return field;
  }
  const DiscreteOperator op(k, default_rule_for(k, nodes));
  r = solve_translation_invariant(op, cfg, GridFunction::constant(op.rule(), 1.0));
  if (!r.ok() && cfg.newton_fallback) r = refine_newton(op, GridFunction::constant(op.rule(), 1.0), cfg);
  if (!r.ok()) throw std::runtime_error("solver_boundary_field: solver failed: " + to_string(r.status));
  const auto f = r.point.f;
  return BoundaryField::translation_invariant(tree, grid->nodes, [&](double t) { return std::log(op.A_at(f, t)); });
}

}  // namespace cayley

#endif  // CAYLEY_TREE_ORACLE_HPP
