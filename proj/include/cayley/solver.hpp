#ifndef CAYLEY_SOLVER_HPP
#define CAYLEY_SOLVER_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cayley/integral_operator.hpp"

namespace cayley {

struct SolverConfig {
  double tol = 1e-10;
  int max_iter = 10000;
  double damping = 1.0;
  double dedup_tol = 1e-6;
  std::uint64_t seed = 0;
  /// multistart_search retries Newton from a start whose Picard run failed.
  bool newton_fallback = true;

  void validate() const {
    if (!(tol > 0.0)) throw std::invalid_argument("SolverConfig: tol must be positive");
    if (!(damping > 0.0 && damping <= 1.0)) throw std::invalid_argument("SolverConfig: damping must lie in (0,1]");
    if (max_iter < 1) throw std::invalid_argument("SolverConfig: max_iter must be >= 1");
    if (!(dedup_tol >= 0.0)) throw std::invalid_argument("SolverConfig: dedup_tol must be >= 0");
  }
};

enum class SolveMethod { picard, newton };
enum class SolveStatus {
  converged,
  not_converged,
  nonpositive_image,
  degenerate_normalizer,
  singular_jacobian,
  precondition_violated
};
enum class Classification { translation_invariant, period_two };

inline std::string to_string(SolveMethod m) { return m == SolveMethod::picard ? "picard" : "newton"; }
inline std::string to_string(Classification c) {
  return c == Classification::translation_invariant ? "translation_invariant" : "period_two";
}
inline std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::not_converged: return "not_converged";
    case SolveStatus::nonpositive_image: return "nonpositive_image";
    case SolveStatus::degenerate_normalizer: return "degenerate_normalizer";
    case SolveStatus::singular_jacobian: return "singular_jacobian";
    case SolveStatus::precondition_violated: return "precondition_violated";
  }
  return "unknown";
}

struct FixedPoint {
  GridFunction f;
  double residual = 0.0;  // sup |Af - f| over nodes
  int iterations = 0;
  SolveMethod method = SolveMethod::picard;
};

/// On failure `point` holds the last iterate and its residual.
struct FixedPointResult {
  SolveStatus status = SolveStatus::not_converged;
  FixedPoint point;
  std::vector<double> residual_history;
  bool ok() const noexcept { return status == SolveStatus::converged; }
};

struct PairSolution {
  GridFunction f;
  GridFunction g;
  std::pair<double, double> residuals{0.0, 0.0};  // (|Ag - f|, |Af - g|)
  int iterations = 0;
  Classification classification = Classification::translation_invariant;
};

struct PairResult {
  SolveStatus status = SolveStatus::not_converged;
  PairSolution pair;
  std::vector<double> residual_history;
  bool ok() const noexcept { return status == SolveStatus::converged; }
};

inline SolveStatus status_of(ImageStatus s) {
  switch (s) {
    case ImageStatus::ok: return SolveStatus::converged;
    case ImageStatus::degenerate_normalizer: return SolveStatus::degenerate_normalizer;
    case ImageStatus::nonpositive_image: return SolveStatus::nonpositive_image;
  }
  return SolveStatus::not_converged;
}

/// translation_invariant iff sup|f - g| <= dedup_tol (inclusive).
inline Classification classify_solution(const PairSolution& pair, double dedup_tol) {
  return sup_distance(pair.f, pair.g) <= dedup_tol ? Classification::translation_invariant
                                                   : Classification::period_two;
}

/// Damped Picard iteration f <- (1-d) f + d Af. Starts undamped (cfg.damping);
/// if the residual grows on three consecutive steps the damping drops to 0.5.
inline FixedPointResult solve_translation_invariant(const DiscreteOperator& op, const SolverConfig& cfg,
                                                    const GridFunction& init) {
  cfg.validate();
  FixedPointResult out;
  out.point.f = init;
  out.point.method = SolveMethod::picard;
  if (init.size() != op.size() || !init.strictly_positive()) {
    out.status = SolveStatus::precondition_violated;
    return out;
  }
  GridFunction f = init;
  double damping = cfg.damping;
  int increases = 0;
  double previous = std::numeric_limits<double>::infinity();
  for (int it = 0; it <= cfg.max_iter; ++it) {
    const AImage a = op.apply_A(f);
    if (!a.ok()) {
      out.status = status_of(a.status);
      out.point = {f, out.residual_history.empty() ? std::numeric_limits<double>::infinity()
                                                   : out.residual_history.back(),
                   it, SolveMethod::picard};
      return out;
    }
    const double res = sup_distance(a.image, f);
    out.residual_history.push_back(res);
    if (res <= cfg.tol) {
      out.status = SolveStatus::converged;
      out.point = {f, res, it, SolveMethod::picard};
      return out;
    }
    if (it == cfg.max_iter) break;
    increases = res > previous ? increases + 1 : 0;
    previous = res;
    if (increases >= 3 && damping > 0.5) {
      damping = 0.5;
      increases = 0;
    }
    if (damping == 1.0) {
      f = a.image;
    } else {
      for (std::size_t i = 0; i < f.size(); ++i)
        f.values[i] = (1.0 - damping) * f.values[i] + damping * a.image.values[i];
    }
  }
  out.status = SolveStatus::not_converged;
  out.point = {f, out.residual_history.back(), cfg.max_iter, SolveMethod::picard};
  return out;
}

inline FixedPointResult solve_translation_invariant(const Kernel& k, const SolverConfig& cfg,
                                                    const GridFunction& init) {
  return solve_translation_invariant(DiscreteOperator(k, init.rule), cfg, init);
}

namespace detail {
inline bool lexicographically_less(const GridFunction& a, const GridFunction& b) {
  return std::lexicographical_compare(a.values.begin(), a.values.end(), b.values.begin(), b.values.end());
}
}  // namespace detail

/// Simultaneous iteration (f, g) <- ((1-d) f + d Ag, (1-d) g + d Af) for
/// f = Ag, g = Af. Equal starts stay equal. The converged pair is reported
/// in lexicographic order of node values.
inline PairResult solve_period_two(const DiscreteOperator& op, const SolverConfig& cfg, const GridFunction& init_f,
                                   const GridFunction& init_g) {
  cfg.validate();
  PairResult out;
  out.pair.f = init_f;
  out.pair.g = init_g;
  if (init_f.size() != op.size() || init_g.size() != op.size() || !init_f.strictly_positive() ||
      !init_g.strictly_positive()) {
    out.status = SolveStatus::precondition_violated;
    return out;
  }
  GridFunction f = init_f;
  GridFunction g = init_g;
  for (int it = 0; it <= cfg.max_iter; ++it) {
    const AImage af = op.apply_A(f);
    const AImage ag = op.apply_A(g);
    if (!af.ok() || !ag.ok()) {
      out.status = status_of(!af.ok() ? af.status : ag.status);
      out.pair.f = f;
      out.pair.g = g;
      out.pair.iterations = it;
      return out;
    }
    const double rf = sup_distance(ag.image, f);
    const double rg = sup_distance(af.image, g);
    out.residual_history.push_back(std::max(rf, rg));
    if ((rf <= cfg.tol && rg <= cfg.tol) || it == cfg.max_iter) {
      out.status = (rf <= cfg.tol && rg <= cfg.tol) ? SolveStatus::converged : SolveStatus::not_converged;
      PairSolution sol{f, g, {rf, rg}, it, Classification::translation_invariant};
      if (detail::lexicographically_less(sol.g, sol.f)) {
        std::swap(sol.f, sol.g);
        std::swap(sol.residuals.first, sol.residuals.second);
      }
      sol.classification = classify_solution(sol, cfg.dedup_tol);
      out.pair = std::move(sol);
      return out;
    }
    const double d = cfg.damping;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double nf = (1.0 - d) * f.values[i] + d * ag.image.values[i];
      const double ng = (1.0 - d) * g.values[i] + d * af.image.values[i];
      f.values[i] = nf;
      g.values[i] = ng;
    }
  }
  return out;
}

inline PairResult solve_period_two(const Kernel& k, const SolverConfig& cfg, const GridFunction& init_f,
                                   const GridFunction& init_g) {
  return solve_period_two(DiscreteOperator(k, init_f.rule), cfg, init_f, init_g);
}

/// Newton on F(f) = Af - f with a forward-difference Jacobian (relative step
/// 1e-7). Steps are halved while they would leave the positive cone.
inline FixedPointResult refine_newton(const DiscreteOperator& op, const GridFunction& f0, const SolverConfig& cfg,
                                      double target = 1e-12, int max_steps = 50) {
  FixedPointResult out;
  out.point = {f0, std::numeric_limits<double>::infinity(), 0, SolveMethod::newton};
  if (f0.size() != op.size() || !f0.strictly_positive()) {
    out.status = SolveStatus::precondition_violated;
    return out;
  }
  const std::size_t n = op.size();
  const double goal = std::min(target, cfg.tol);
  GridFunction f = f0;

  const auto residual_vec = [&](const GridFunction& x, Eigen::VectorXd& r) -> ImageStatus {
    const AImage a = op.apply_A(x);
    if (!a.ok()) return a.status;
    r.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) r[static_cast<Eigen::Index>(i)] = a.image.values[i] - x.values[i];
    return ImageStatus::ok;
  };

  Eigen::VectorXd r;
  if (auto s = residual_vec(f, r); s != ImageStatus::ok) {
    out.status = status_of(s);
    return out;
  }
  double res = r.lpNorm<Eigen::Infinity>();
  out.residual_history.push_back(res);
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (int step = 0; step <= max_steps; ++step) {
    out.point = {f, res, step, SolveMethod::newton};
    if (res <= goal) {
      out.status = SolveStatus::converged;
      return out;
    }
    if (step == max_steps) break;
    for (std::size_t j = 0; j < n; ++j) {
      GridFunction probe = f;
      const double h = 1e-7 * std::max(std::abs(f.values[j]), 1.0);
      probe.values[j] += h;
      Eigen::VectorXd rp;
      if (residual_vec(probe, rp) != ImageStatus::ok) {
        probe.values[j] = f.values[j] - h;
        if (auto s = residual_vec(probe, rp); s != ImageStatus::ok) {
          out.status = status_of(s);
          return out;
        }
        jac.col(static_cast<Eigen::Index>(j)) = (r - rp) / h;
      } else {
        jac.col(static_cast<Eigen::Index>(j)) = (rp - r) / h;
      }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-14)) {
      out.status = SolveStatus::singular_jacobian;
      return out;
    }
    const Eigen::VectorXd delta = lu.solve(-r);
    double lambda = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 30; ++halving, lambda *= 0.5) {
      GridFunction trial = f;
      for (std::size_t i = 0; i < n; ++i) trial.values[i] += lambda * delta[static_cast<Eigen::Index>(i)];
      if (!trial.strictly_positive()) continue;
      Eigen::VectorXd rt;
      if (residual_vec(trial, rt) != ImageStatus::ok) continue;
      f = std::move(trial);
      r = std::move(rt);
      res = r.lpNorm<Eigen::Infinity>();
      accepted = true;
      break;
    }
    out.residual_history.push_back(res);
    if (!accepted) {
      out.status = SolveStatus::not_converged;
      return out;
    }
  }
  out.status = SolveStatus::not_converged;
  return out;
}

inline FixedPointResult refine_newton(const Kernel& k, const GridFunction& f0, const SolverConfig& cfg) {
  return refine_newton(DiscreteOperator(k, f0.rule), f0, cfg);
}

/// f2(t) = 2^tau / (2^tau - 1) (1 + (t - 1/2)^tau).
inline double tau_f2_value(const OddRational& tau, double t) {
  const double two_tau = std::pow(2.0, tau.value());
  return two_tau / (two_tau - 1.0) * (1.0 + odd_pow(t - 0.5, tau));
}

/// Seeded starting functions: constant 1, the f2 shape for the tau family,
/// then exp(eps_i) with eps_i uniform in [-0.5, 0.5] per node.
inline std::vector<GridFunction> multistart_inits(const Kernel& k, const RulePtr& rule, int n_starts,
                                                  std::uint64_t seed) {
  std::vector<GridFunction> inits;
  inits.reserve(static_cast<std::size_t>(n_starts));
  inits.push_back(GridFunction::constant(rule, 1.0));
  if (k.tau() && n_starts > 1) {
    const OddRational tau = *k.tau();
    inits.push_back(GridFunction::sample(rule, [&](double t) { return tau_f2_value(tau, t); }));
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> eps(-0.5, 0.5);
  while (static_cast<int>(inits.size()) < n_starts) {
    std::vector<double> v(rule->size());
    for (auto& x : v) x = std::exp(eps(rng));
    inits.emplace_back(rule, std::move(v));
  }
  return inits;
}

/// Picard from every seeded start, Newton fallback for starts where Picard
/// fails, merge results closer than dedup_tol. Sorted by residual; the list
/// is empty when nothing converges.
inline std::vector<FixedPoint> multistart_search(const DiscreteOperator& op, const SolverConfig& cfg, int n_starts) {
  if (n_starts < 1) throw std::invalid_argument("multistart_search: n_starts must be >= 1");
  cfg.validate();
  const auto inits = multistart_inits(op.kernel(), op.rule(), n_starts, cfg.seed);
  std::vector<FixedPoint> found;
  for (const auto& init : inits) {
    FixedPointResult r = solve_translation_invariant(op, cfg, init);
    if (!r.ok() && cfg.newton_fallback) r = refine_newton(op, init, cfg);
    if (!r.ok() || !r.point.f.strictly_positive()) continue;
    auto dup = std::find_if(found.begin(), found.end(), [&](const FixedPoint& p) {
      return sup_distance(p.f, r.point.f) <= cfg.dedup_tol;
    });
    if (dup == found.end()) {
      found.push_back(std::move(r.point));
    } else if (r.point.residual < dup->residual) {
      *dup = std::move(r.point);
    }
  }
  std::stable_sort(found.begin(), found.end(),
                   [](const FixedPoint& a, const FixedPoint& b) { return a.residual < b.residual; });
  return found;
}

inline std::vector<FixedPoint> multistart_search(const Kernel& k, const SolverConfig& cfg, int n_starts,
                                                 int nodes = 64) {
  return multistart_search(DiscreteOperator(k, default_rule_for(k, nodes)), cfg, n_starts);
}

}  // namespace cayley

#endif  // CAYLEY_SOLVER_HPP
