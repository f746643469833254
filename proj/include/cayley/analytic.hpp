#ifndef CAYLEY_ANALYTIC_HPP
#define CAYLEY_ANALYTIC_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "cayley/integral_operator.hpp"
#include "cayley/solver.hpp"

namespace cayley {

/// Exact rational p/q with q > 0, used for exponents of power functions.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational(std::int64_t n = 0, std::int64_t d = 1) : num(n), den(d) {
    if (d == 0) throw std::invalid_argument("Rational: zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const auto g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend Rational operator+(Rational a, Rational b) { return {a.num * b.den + b.num * a.den, a.den * b.den}; }
  friend Rational operator*(Rational a, Rational b) { return {a.num * b.num, a.den * b.den}; }
  friend bool operator==(const Rational&, const Rational&) = default;
};

/// c * sign(x)^parity |x|^e on the centered variable x = u - 1/2.
struct CenteredPower {
  double coefficient = 1.0;
  Rational exponent{1, 1};
  bool odd = true;

  /// int_0^1 of the term: 0 when odd, otherwise c * 2 (1/2)^(e+1) / (e+1).
  double integral_over_unit() const {
    if (odd) return 0.0;
    const Rational e1 = exponent + Rational(1);
    return coefficient * 2.0 * std::pow(0.5, e1.value()) / e1.value();
  }

  friend CenteredPower operator*(const CenteredPower& a, const CenteredPower& b) {
    return {a.coefficient * b.coefficient, a.exponent + b.exponent, a.odd != b.odd};
  }
};

inline CenteredPower centered_odd_power(const OddRational& tau) {
  return {1.0, Rational(tau.p(), tau.q()), true};
}

/// I1 = int (u-1/2)^tau du and I2 = int (u-1/2)^(2 tau) du, each evaluated
/// symbolically and by quadrature on the kink-adapted rule.
struct MomentPair {
  double I1 = 0.0;
  double I2 = 0.0;
  double I1_quadrature = 0.0;
  double I2_quadrature = 0.0;
};

inline MomentPair moment_integrals(const OddRational& tau, int nodes = 64) {
  const CenteredPower a = centered_odd_power(tau);
  MomentPair m;
  m.I1 = a.integral_over_unit();
  m.I2 = (a * a).integral_over_unit();
  const auto rule = kink_adapted_rule(nodes, static_cast<int>(tau.q()));
  m.I1_quadrature = integrate([&](double u) { return odd_pow(u - 0.5, tau); }, *rule);
  m.I2_quadrature = integrate(
      [&](double u) {
        const double x = odd_pow(u - 0.5, tau);
        return x * x;
      },
      *rule);
  return m;
}

inline GridFunction analytic_f1(const RulePtr& rule) { return GridFunction::constant(rule, 1.0); }

inline GridFunction analytic_f2(const OddRational& tau, const RulePtr& rule) {
  return GridFunction::sample(rule, [&](double t) { return tau_f2_value(tau, t); });
}

/// Closed form of (A f2)(t) for the tau kernel with constant C: the image is
/// (1 + C I2^2 a(t)) / (1 - C I2^2 2^-tau), a(t) = (t - 1/2)^tau. Equals f2
/// exactly when C I2^2 = 1, i.e. for the corrected constant.
inline double tau_f2_image(const OddRational& tau, TauConstantVariant variant, double t) {
  const double i2 = (centered_odd_power(tau) * centered_odd_power(tau)).integral_over_unit();
  const double s = tau_constant(tau, variant) * i2 * i2;
  return (1.0 + s * odd_pow(t - 0.5, tau)) / (1.0 - s * std::pow(2.0, -tau.value()));
}

struct VerificationReport {
  double residual_sup = 0.0;
  std::vector<double> residual_profile;  // one per node, then the t = 0 anchor
  std::vector<double> image;             // (A candidate) at the nodes
  std::string kernel_id;
  std::string candidate_id;
  ImageStatus status = ImageStatus::ok;
};

/// Residual (A c - c) at every node plus the anchor t = 0, where the
/// candidate takes the value candidate_at_zero (1 for boundary functions).
inline VerificationReport verify_fixed_point(const DiscreteOperator& op, const GridFunction& candidate,
                                             std::string candidate_id, double candidate_at_zero = 1.0) {
  if (!candidate.strictly_positive()) throw std::invalid_argument("verify_fixed_point: candidate must be positive");
  VerificationReport r;
  r.kernel_id = op.kernel().describe();
  r.candidate_id = std::move(candidate_id);
  const AImage a = op.apply_A(candidate);
  r.status = a.status;
  if (a.status == ImageStatus::degenerate_normalizer)
    throw std::runtime_error("verify_fixed_point: degenerate normalizer");
  r.image = a.image.values;
  r.residual_profile.resize(candidate.size() + 1);
  for (std::size_t i = 0; i < candidate.size(); ++i) r.residual_profile[i] = a.image.values[i] - candidate.values[i];
  r.residual_profile.back() = 1.0 - candidate_at_zero;
  r.residual_sup = 0.0;
  for (double x : r.residual_profile) r.residual_sup = std::max(r.residual_sup, std::abs(x));
  return r;
}

inline VerificationReport verify_fixed_point(const Kernel& k, const GridFunction& candidate,
                                             std::string candidate_id = "candidate", double candidate_at_zero = 1.0) {
  return verify_fixed_point(DiscreteOperator(k, candidate.rule), candidate, std::move(candidate_id),
                            candidate_at_zero);
}

struct DegeneracyReport {
  bool degenerate = false;
  double max_deviation = 0.0;  // max over samples of sup |Af - 1|
  int samples = 0;
};

/// Applies A to n_samples random positive functions exp(eps_i), eps_i uniform
/// in [-1, 1]; degenerate iff every image is the constant 1 within 1e-10.
inline DegeneracyReport check_degenerate_operator(const DiscreteOperator& op, int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("check_degenerate_operator: n_samples must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> eps(-1.0, 1.0);
  DegeneracyReport r;
  r.samples = n_samples;
  for (int s = 0; s < n_samples; ++s) {
    std::vector<double> v(op.size());
    for (auto& x : v) x = std::exp(eps(rng));
    const AImage a = op.apply_A(GridFunction(op.rule(), std::move(v)));
    if (a.status == ImageStatus::degenerate_normalizer) {
      r.max_deviation = std::numeric_limits<double>::infinity();
      continue;
    }
    for (double x : a.image.values) r.max_deviation = std::max(r.max_deviation, std::abs(x - 1.0));
  }
  r.degenerate = r.max_deviation <= 1e-10;
  return r;
}

inline DegeneracyReport check_degenerate_operator(const Kernel& k, int n_samples, std::uint64_t seed,
                                                  int nodes = 64) {
  return check_degenerate_operator(DiscreteOperator(k, default_rule_for(k, nodes)), n_samples, seed);
}

}  // namespace cayley

#endif  // CAYLEY_ANALYTIC_HPP
