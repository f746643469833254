#ifndef CAYLEY_QUADRATURE_HPP
#define CAYLEY_QUADRATURE_HPP

#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace cayley {

enum class RuleKind { gauss_legendre, kink_adapted, trapezoid };

inline std::string to_string(RuleKind kind) {
  switch (kind) {
    case RuleKind::gauss_legendre: return "gauss_legendre";
    case RuleKind::kink_adapted: return "kink_adapted";
    case RuleKind::trapezoid: return "trapezoid";
  }
  return "unknown";
}

/// Nodes and weights for integrals over [0,1] against Lebesgue measure.
struct QuadratureRule {
  RuleKind kind = RuleKind::gauss_legendre;
  std::vector<double> nodes;    // strictly increasing, inside [0,1]
  std::vector<double> weights;  // positive, summing to 1

  std::size_t size() const noexcept { return nodes.size(); }
};

using RulePtr = std::shared_ptr<const QuadratureRule>;

namespace detail {

// Gauss-Legendre on [-1,1]; returns the non-negative half (descending x) and
// their weights. Newton on the three-term recurrence from the Chebyshev guess.
inline void legendre_half(int n, std::vector<double>& x, std::vector<double>& w) {
  const int m = (n + 1) / 2;
  x.assign(m, 0.0);
  w.assign(m, 0.0);
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) <= 1e-16) break;
    }
    // one more derivative evaluation at the converged root
    double p0 = 1.0;
    double p1 = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

}  // namespace detail

/// n-point Gauss-Legendre rule mapped to [0,1]. Exact for degree <= 2n-1.
inline RulePtr gauss_legendre(int n) {
  if (n < 1 || n > 512) throw std::invalid_argument("gauss_legendre: n must lie in [1, 512]");
  std::vector<double> hx, hw;
  detail::legendre_half(n, hx, hw);
  auto rule = std::make_shared<QuadratureRule>();
  rule->kind = RuleKind::gauss_legendre;
  rule->nodes.resize(n);
  rule->weights.resize(n);
  const int m = static_cast<int>(hx.size());
  for (int i = 0; i < m; ++i) {
    // hx is descending in [0,1): mirror pairs around the midpoint
    rule->nodes[i] = 0.5 - 0.5 * hx[i];
    rule->nodes[n - 1 - i] = 0.5 + 0.5 * hx[i];
    rule->weights[i] = 0.5 * hw[i];
    rule->weights[n - 1 - i] = 0.5 * hw[i];
  }
  if (n % 2 == 1) rule->nodes[m - 1] = 0.5;
  return rule;
}

/// Two-panel rule split at 1/2 with the substitution u = 1/2 +- s^grading / 2
/// on each panel, n/2 Gauss points in s per panel. For tau = p/q and
/// grading = q the odd root |u - 1/2|^tau becomes the polynomial s^p, so
/// integrands built from (u - 1/2)^tau are integrated without the kink error.
inline RulePtr kink_adapted_rule(int n, int grading) {
  if (n < 2 || n > 512 || n % 2 != 0)
    throw std::invalid_argument("kink_adapted_rule: n must be even and in [2, 512]");
  if (grading < 1) throw std::invalid_argument("kink_adapted_rule: grading must be >= 1");
  const auto panel = gauss_legendre(n / 2);
  const int h = n / 2;
  auto rule = std::make_shared<QuadratureRule>();
  rule->kind = RuleKind::kink_adapted;
  rule->nodes.resize(n);
  rule->weights.resize(n);
  for (int i = 0; i < h; ++i) {
    const double s = panel->nodes[i];
    const double sq = std::pow(s, grading);
    const double jac = 0.5 * grading * std::pow(s, grading - 1) * panel->weights[i];
    rule->nodes[h + i] = 0.5 + 0.5 * sq;
    rule->weights[h + i] = jac;
    rule->nodes[h - 1 - i] = 0.5 - 0.5 * sq;
    rule->weights[h - 1 - i] = jac;
  }
  return rule;
}

/// Composite trapezoid rule on m uniform points including both endpoints.
inline RulePtr trapezoid_rule(int m) {
  if (m < 2) throw std::invalid_argument("trapezoid_rule: m must be >= 2");
  auto rule = std::make_shared<QuadratureRule>();
  rule->kind = RuleKind::trapezoid;
  rule->nodes.resize(m);
  rule->weights.assign(m, 1.0 / (m - 1));
  for (int i = 0; i < m; ++i) rule->nodes[i] = static_cast<double>(i) / (m - 1);
  rule->weights.front() *= 0.5;
  rule->weights.back() *= 0.5;
  return rule;
}

template <class F>
double integrate(F&& g, const QuadratureRule& rule) {
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) sum += rule.weights[i] * g(rule.nodes[i]);
  return sum;
}

/// Tensor-product rule over [0,1]^2, summed i-then-j.
template <class G>
double integrate_2d(G&& g, const QuadratureRule& rule) {
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < rule.size(); ++j) row += rule.weights[j] * g(rule.nodes[i], rule.nodes[j]);
    sum += rule.weights[i] * row;
  }
  return sum;
}

}  // namespace cayley

#endif  // CAYLEY_QUADRATURE_HPP
