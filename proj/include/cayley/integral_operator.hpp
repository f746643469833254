#ifndef CAYLEY_INTEGRAL_OPERATOR_HPP
#define CAYLEY_INTEGRAL_OPERATOR_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cayley/kernel.hpp"
#include "cayley/quadrature.hpp"

namespace cayley {

/// Values of a function on [0,1] at the nodes of a quadrature rule.
struct GridFunction {
  RulePtr rule;
  std::vector<double> values;

  GridFunction() = default;
  GridFunction(RulePtr r, std::vector<double> v) : rule(std::move(r)), values(std::move(v)) {
    if (!rule) throw std::invalid_argument("GridFunction: null rule");
    if (values.size() != rule->size()) throw std::invalid_argument("GridFunction: size does not match rule");
  }

  static GridFunction constant(RulePtr r, double c) {
    const auto n = r->size();
    return GridFunction(std::move(r), std::vector<double>(n, c));
  }

  template <class F>
  static GridFunction sample(RulePtr r, F&& f) {
    std::vector<double> v(r->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(r->nodes[i]);
    return GridFunction(std::move(r), std::move(v));
  }

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }

  bool strictly_positive() const {
    return std::all_of(values.begin(), values.end(), [](double x) { return x > 0.0; });
  }

  GridFunction scaled(double c) const {
    GridFunction out = *this;
    for (auto& x : out.values) x *= c;
    return out;
  }
};

inline double sup_distance(const GridFunction& a, const GridFunction& b) {
  if (a.size() != b.size()) throw std::invalid_argument("sup_distance: size mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.values[i] - b.values[i]));
  return d;
}

/// Rule used for a kernel when the caller does not choose one: graded at 1/2
/// with grading q for the tau family, plain Gauss-Legendre otherwise.
inline RulePtr default_rule_for(const Kernel& k, int n) {
  if (k.tau()) return kink_adapted_rule(n, static_cast<int>(k.tau()->q()));
  return gauss_legendre(n);
}

enum class ImageStatus { ok, degenerate_normalizer, nonpositive_image };

inline std::string to_string(ImageStatus s) {
  switch (s) {
    case ImageStatus::ok: return "ok";
    case ImageStatus::degenerate_normalizer: return "degenerate_normalizer";
    case ImageStatus::nonpositive_image: return "nonpositive_image";
  }
  return "unknown";
}

/// Result of applying A. `image` is filled unless the normalizer degenerates.
struct AImage {
  GridFunction image;
  double normalizer = 0.0;  // (Wf)(0)
  ImageStatus status = ImageStatus::ok;
  bool ok() const noexcept { return status == ImageStatus::ok; }
};

/// Nystrom discretization of
///   (Wf)(t) = int int K(t,u,v) f(u) f(v) du dv,   (Af)(t) = (Wf)(t) / (Wf)(0)
/// on a fixed rule. Kernel values at (node_k, node_i, node_j) and at the
/// anchor t = 0 are tabulated once at construction.
class DiscreteOperator {
 public:
  DiscreteOperator(Kernel kernel, RulePtr rule) : kernel_(std::move(kernel)), rule_(std::move(rule)) {
    if (!rule_) throw std::invalid_argument("DiscreteOperator: null rule");
    const std::size_t n = rule_->size();
    table_.resize((n + 1) * n * n);
    for (std::size_t k = 0; k <= n; ++k) {
      const double t = k < n ? rule_->nodes[k] : 0.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) table_[(k * n + i) * n + j] = kernel_(t, rule_->nodes[i], rule_->nodes[j]);
    }
  }

  const Kernel& kernel() const noexcept { return kernel_; }
  const RulePtr& rule() const noexcept { return rule_; }
  std::size_t size() const noexcept { return rule_->size(); }

  /// (Wf) at every node; the extra trailing entry is (Wf)(0).
  std::vector<double> apply_W_with_anchor(const GridFunction& f) const {
    check_input(f);
    const std::size_t n = size();
    std::vector<double> wf(n);
    for (std::size_t i = 0; i < n; ++i) wf[i] = rule_->weights[i] * f.values[i];
    std::vector<double> out(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
      const double* row = &table_[k * n * n];
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double inner = 0.0;
        for (std::size_t j = 0; j < n; ++j) inner += row[i * n + j] * wf[j];
        sum += wf[i] * inner;
      }
      out[k] = sum;
    }
    return out;
  }

  GridFunction apply_W(const GridFunction& f) const {
    auto w = apply_W_with_anchor(f);
    w.pop_back();
    return GridFunction(rule_, std::move(w));
  }

  AImage apply_A(const GridFunction& f) const {
    auto w = apply_W_with_anchor(f);
    AImage out;
    out.normalizer = w.back();
    if (!(std::abs(out.normalizer) >= 1e-300)) {
      out.status = ImageStatus::degenerate_normalizer;
      return out;
    }
    w.pop_back();
    for (auto& x : w) x /= out.normalizer;
    out.status = std::all_of(w.begin(), w.end(), [](double x) { return x > 0.0; }) ? ImageStatus::ok
                                                                                  : ImageStatus::nonpositive_image;
    out.image = GridFunction(rule_, std::move(w));
    return out;
  }

  /// (Wf)(t) at an arbitrary t by re-evaluating the quadrature sum.
  double W_at(const GridFunction& f, double t) const {
    check_input(f);
    const std::size_t n = size();
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double inner = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        inner += kernel_(t, rule_->nodes[i], rule_->nodes[j]) * rule_->weights[j] * f.values[j];
      sum += rule_->weights[i] * f.values[i] * inner;
    }
    return sum;
  }

  /// Nystrom natural extension of Af to an arbitrary t in [0,1].
  double A_at(const GridFunction& f, double t) const { return W_at(f, t) / W_at(f, 0.0); }

 private:
  void check_input(const GridFunction& f) const {
    if (f.size() != size()) throw std::invalid_argument("DiscreteOperator: grid function size mismatch");
  }

  Kernel kernel_;
  RulePtr rule_;
  std::vector<double> table_;
};

inline GridFunction apply_W(const Kernel& k, const GridFunction& f) { return DiscreteOperator(k, f.rule).apply_W(f); }

inline AImage apply_A(const Kernel& k, const GridFunction& f) {
  if (!f.strictly_positive()) throw std::invalid_argument("apply_A: f must be positive at every node");
  return DiscreteOperator(k, f.rule).apply_A(f);
}

/// Product of the two one-dimensional normalized operators of a separable
/// kernel: [int th1(t,u) f / int th1(0,u) f] * [int th2(t,v) f / int th2(0,v) f].
inline GridFunction apply_pair_operator(const PairKernel& pk, const GridFunction& f) {
  const auto& rule = *f.rule;
  const auto one_d = [&](const PairFn& theta, double t) {
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weights[i] * theta(t, rule.nodes[i]) * f.values[i];
    return s;
  };
  const double n1 = one_d(pk.theta1, 0.0);
  const double n2 = one_d(pk.theta2, 0.0);
  std::vector<double> out(rule.size());
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const double t = rule.nodes[k];
    out[k] = (one_d(pk.theta1, t) / n1) * (one_d(pk.theta2, t) / n2);
  }
  return GridFunction(f.rule, std::move(out));
}

}  // namespace cayley

#endif  // CAYLEY_INTEGRAL_OPERATOR_HPP
