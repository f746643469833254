#ifndef CAYLEY_KERNEL_HPP
#define CAYLEY_KERNEL_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cayley/odd_rational.hpp"

namespace cayley {

/// Couplings of the four competing interactions plus inverse temperature.
/// J3: triples of neighbors, J: second neighbors, J1: nearest neighbors,
/// alpha: external field.
struct CouplingParams {
  double J3 = 0.0;
  double J = 0.0;
  double J1 = 0.0;
  double alpha = 0.0;
  double beta = 1.0;

  void validate() const {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("CouplingParams: beta must be positive");
  }
};

using TripleFn = std::function<double(double, double, double)>;
using PairFn = std::function<double(double, double)>;

/// Interaction functions xi1 (triples, parent first), xi2 (siblings) and
/// xi3 (parent, child).
struct Interactions {
  TripleFn xi1;
  PairFn xi2;
  PairFn xi3;
};

/// xi1(x,y,z) = xyz, xi2(x,y) = xi3(x,y) = xy.
inline Interactions ising_interactions() {
  return {[](double x, double y, double z) { return x * y * z; },
          [](double x, double y) { return x * y; },
          [](double x, double y) { return x * y; }};
}

enum class KernelFamily { general, ising, potts, tau, sum, custom };

inline std::string to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::general: return "general";
    case KernelFamily::ising: return "ising";
    case KernelFamily::potts: return "potts";
    case KernelFamily::tau: return "tau";
    case KernelFamily::sum: return "sum";
    case KernelFamily::custom: return "custom";
  }
  return "unknown";
}

enum class TauConstantVariant { Printed, Corrected };

inline std::string to_string(TauConstantVariant v) {
  return v == TauConstantVariant::Printed ? "printed" : "corrected";
}

/// 4^tau (tau+1)^2 as displayed with the kernel, or 16^tau (2 tau+1)^2, the
/// value that makes f2 a fixed point.
inline double tau_constant(const OddRational& tau, TauConstantVariant variant) {
  const double t = tau.value();
  if (variant == TauConstantVariant::Printed) return std::pow(4.0, t) * (t + 1.0) * (t + 1.0);
  return std::pow(16.0, t) * (2.0 * t + 1.0) * (2.0 * t + 1.0);
}

enum class PottsMode { reduced, naive_diagonal };

/// Immutable kernel K(t,u,v) on [0,1]^3 with family metadata.
class Kernel {
 public:
  using Param = std::pair<std::string, double>;

  Kernel(KernelFamily family, std::vector<Param> params, TripleFn eval)
      : family_(family), params_(std::move(params)), eval_(std::make_shared<TripleFn>(std::move(eval))) {}

  double operator()(double t, double u, double v) const { return (*eval_)(t, u, v); }
  double eval(double t, double u, double v) const { return (*eval_)(t, u, v); }

  KernelFamily family() const noexcept { return family_; }
  const std::vector<Param>& params() const noexcept { return params_; }

  /// Set for the tau family; lets callers pick a quadrature graded to the kink.
  const std::optional<OddRational>& tau() const noexcept { return tau_; }
  Kernel& with_tau(OddRational tau) {
    tau_ = tau;
    return *this;
  }

  /// True when K(t,u,v) is known not to depend on t.
  bool t_independent() const noexcept { return t_independent_; }
  Kernel& mark_t_independent() {
    t_independent_ = true;
    return *this;
  }

  std::string describe() const {
    std::string s = to_string(family_);
    for (const auto& [k, v] : params_) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      s += " " + k + "=" + buf;
    }
    return s;
  }

 private:
  KernelFamily family_;
  std::vector<Param> params_;
  std::shared_ptr<const TripleFn> eval_;
  std::optional<OddRational> tau_;
  bool t_independent_ = false;
};

namespace detail {
inline std::vector<Kernel::Param> coupling_params(const CouplingParams& p) {
  return {{"J3", p.J3}, {"J", p.J}, {"J1", p.J1}, {"alpha", p.alpha}, {"beta", p.beta}};
}
}  // namespace detail

/// K(t,u,v) = exp{J3 b xi1(t,u,v) + J b xi2(u,v) + J1 b (xi3(t,u)+xi3(t,v)) + alpha b (u+v)}.
inline Kernel build_interaction_kernel(const CouplingParams& params, TripleFn xi1, PairFn xi2, PairFn xi3,
                                       KernelFamily family = KernelFamily::general) {
  params.validate();
  const CouplingParams p = params;
  auto eval = [p, xi1 = std::move(xi1), xi2 = std::move(xi2), xi3 = std::move(xi3)](double t, double u, double v) {
    const double b = p.beta;
    double e = 0.0;
    if (p.J3 != 0.0) e += p.J3 * b * xi1(t, u, v);
    if (p.J != 0.0) e += p.J * b * xi2(u, v);
    if (p.J1 != 0.0) e += p.J1 * b * (xi3(t, u) + xi3(t, v));
    if (p.alpha != 0.0) e += p.alpha * b * (u + v);
    return std::exp(e);
  };
  Kernel k(family, detail::coupling_params(p), std::move(eval));
  if (p.J3 == 0.0 && p.J1 == 0.0) k.mark_t_independent();
  return k;
}

inline Kernel build_interaction_kernel(const CouplingParams& params, const Interactions& xi,
                                       KernelFamily family = KernelFamily::general) {
  return build_interaction_kernel(params, xi.xi1, xi.xi2, xi.xi3, family);
}

inline Kernel make_ising_kernel(const CouplingParams& params) {
  return build_interaction_kernel(params, ising_interactions(), KernelFamily::ising);
}

/// Potts kernel with Kronecker deltas. The reduced form drops the delta terms
/// (they live on Lebesgue-null diagonals); naive_diagonal evaluates them
/// pointwise. The Potts model carries no triple term, so J3 is ignored.
inline Kernel make_potts_kernel(const CouplingParams& params, PottsMode mode) {
  params.validate();
  const CouplingParams p = params;
  auto params_list = detail::coupling_params(p);
  if (mode == PottsMode::reduced) {
    params_list.emplace_back("naive_diagonal", 0.0);
    Kernel k(KernelFamily::potts, std::move(params_list),
             [p](double, double u, double v) { return std::exp(p.alpha * p.beta * (u + v)); });
    k.mark_t_independent();
    return k;
  }
  params_list.emplace_back("naive_diagonal", 1.0);
  return Kernel(KernelFamily::potts, std::move(params_list), [p](double t, double u, double v) {
    const auto delta = [](double a, double b) { return a == b ? 1.0 : 0.0; };
    return std::exp(p.J * p.beta * delta(u, v) + p.J1 * p.beta * (delta(u, t) + delta(v, t)) +
                    p.alpha * p.beta * (u + v));
  });
}

/// K(t,u,v) = 1 + a(t) a(u) a(v) [C - 1/(a(v) + 1)], a(x) = (x - 1/2)^tau.
inline Kernel make_tau_kernel(const OddRational& tau, TauConstantVariant variant) {
  const double c = tau_constant(tau, variant);
  Kernel k(KernelFamily::tau,
           {{"tau", tau.value()}, {"corrected", variant == TauConstantVariant::Corrected ? 1.0 : 0.0}, {"C", c}},
           [tau, c](double t, double u, double v) {
             const double at = odd_pow(t - 0.5, tau);
             const double au = odd_pow(u - 0.5, tau);
             const double av = odd_pow(v - 0.5, tau);
             return 1.0 + at * au * av * (c - 1.0 / (av + 1.0));
           });
  k.with_tau(tau);
  return k;
}

/// K(t,u,v) = zeta(t,u) + zeta(t,v) for a strictly positive zeta.
inline Kernel make_sum_kernel(PairFn zeta, int validation_grid = 33) {
  for (int i = 0; i < validation_grid; ++i) {
    for (int j = 0; j < validation_grid; ++j) {
      const double t = static_cast<double>(i) / (validation_grid - 1);
      const double u = static_cast<double>(j) / (validation_grid - 1);
      const double z = zeta(t, u);
      if (!(z > 0.0)) throw std::invalid_argument("make_sum_kernel: zeta must be strictly positive");
    }
  }
  return Kernel(KernelFamily::sum, {},
                [zeta = std::move(zeta)](double t, double u, double v) { return zeta(t, u) + zeta(t, v); });
}

// ---------------------------------------------------------------------------
// Diagnostics

struct ScanReport {
  double min_value = std::numeric_limits<double>::infinity();
  std::array<double, 3> argmin{0.0, 0.0, 0.0};
  int grid_resolution = 0;
  bool positive = false;
};

/// Minimum of K over the uniform resolution^3 grid including endpoints.
/// Ties keep the lexicographically first grid point.
inline ScanReport positivity_scan(const Kernel& k, int resolution) {
  if (resolution < 2) throw std::invalid_argument("positivity_scan: resolution must be >= 2");
  ScanReport r;
  r.grid_resolution = resolution;
  const double h = 1.0 / (resolution - 1);
  for (int i = 0; i < resolution; ++i) {
    const double t = i * h;
    for (int j = 0; j < resolution; ++j) {
      const double u = j * h;
      for (int l = 0; l < resolution; ++l) {
        const double v = l * h;
        const double val = k(t, u, v);
        if (val < r.min_value) {
          r.min_value = val;
          r.argmin = {t, u, v};
        }
      }
    }
  }
  r.positive = r.min_value > 0.0;
  return r;
}

enum class SeparabilityFailure { nonpositive_kernel, defect_exceeds_tol };

inline std::string to_string(SeparabilityFailure f) {
  return f == SeparabilityFailure::nonpositive_kernel ? "nonpositive_kernel" : "defect_exceeds_tol";
}

/// Row-major g x g table: (t index, second index).
struct FactorTable {
  int grid = 0;
  std::vector<double> values;
  double at(int ti, int xi) const { return values[static_cast<std::size_t>(ti) * grid + xi]; }
};

struct SeparabilityReport {
  bool separable = false;
  double max_mixed_defect = 0.0;
  double tolerance = 0.0;
  int grid = 0;
  std::optional<std::pair<FactorTable, FactorTable>> factors;
  std::optional<SeparabilityFailure> failure_reason;
};

/// Tests K(t,u,v) = theta1(t,u) theta2(t,v) on the uniform grid via the log
/// mixed differences over every (u1,u2) x (v1,v2) rectangle at each t.
inline SeparabilityReport separability_test(const Kernel& k, int grid, double tol = 1e-10) {
  if (grid < 3) throw std::invalid_argument("separability_test: grid must be >= 3");
  SeparabilityReport r;
  r.grid = grid;
  r.tolerance = tol;
  const auto g = static_cast<std::size_t>(grid);
  const double h = 1.0 / (grid - 1);
  std::vector<double> logk(g * g * g);
  for (std::size_t i = 0; i < g; ++i)
    for (std::size_t j = 0; j < g; ++j)
      for (std::size_t l = 0; l < g; ++l) {
        const double val = k(i * h, j * h, l * h);
        if (!(val > 0.0)) {
          r.failure_reason = SeparabilityFailure::nonpositive_kernel;
          r.max_mixed_defect = std::numeric_limits<double>::infinity();
          return r;
        }
        logk[(i * g + j) * g + l] = std::log(val);
      }
  const auto L = [&](std::size_t i, std::size_t j, std::size_t l) { return logk[(i * g + j) * g + l]; };
  double worst = 0.0;
  for (std::size_t i = 0; i < g; ++i)
    for (std::size_t u1 = 0; u1 < g; ++u1)
      for (std::size_t u2 = u1 + 1; u2 < g; ++u2)
        for (std::size_t v1 = 0; v1 < g; ++v1)
          for (std::size_t v2 = v1 + 1; v2 < g; ++v2) {
            const double d = std::abs(L(i, u1, v1) + L(i, u2, v2) - L(i, u1, v2) - L(i, u2, v1));
            if (d > worst) worst = d;
          }
  r.max_mixed_defect = worst;
  if (worst > tol) {
    r.failure_reason = SeparabilityFailure::defect_exceeds_tol;
    return r;
  }
  r.separable = true;
  FactorTable th1{grid, std::vector<double>(g * g)};
  FactorTable th2{grid, std::vector<double>(g * g)};
  // anchor (u0, v0) = first grid node
  for (std::size_t i = 0; i < g; ++i)
    for (std::size_t j = 0; j < g; ++j) {
      th1.values[i * g + j] = std::exp(L(i, j, 0));
      th2.values[i * g + j] = std::exp(L(i, 0, j) - L(i, 0, 0));
    }
  r.factors = std::make_pair(std::move(th1), std::move(th2));
  return r;
}

/// theta1(t,u) theta2(t,v) factorization of a separable kernel.
struct PairKernel {
  PairFn theta1;
  PairFn theta2;
};

/// Continuous factors anchored at (u0, v0) = (0, 0):
/// theta1(t,u) = K(t,u,0), theta2(t,v) = K(t,0,v) / K(t,0,0).
inline PairKernel reduce_to_pair_kernel(const Kernel& k, const SeparabilityReport& report) {
  if (!report.separable) throw std::invalid_argument("reduce_to_pair_kernel: kernel is not separable");
  return {[k](double t, double u) { return k(t, u, 0.0); },
          [k](double t, double v) { return k(t, 0.0, v) / k(t, 0.0, 0.0); }};
}

}  // namespace cayley

#endif  // CAYLEY_KERNEL_HPP
