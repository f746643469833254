#ifndef CAYLEY_ODD_RATIONAL_HPP
#define CAYLEY_ODD_RATIONAL_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace cayley {

/// Exponent tau = p/q with p and q odd positive integers. For such exponents
/// x -> x^tau is an odd bijection of the real line, so negative bases are fine.
class OddRational {
 public:
  OddRational(std::int64_t p, std::int64_t q) : p_(p), q_(q) {
    if (p < 1 || q < 1) throw std::invalid_argument("OddRational: p and q must be positive");
    if (p % 2 == 0) throw std::invalid_argument("OddRational: numerator must be odd");
    if (q % 2 == 0) throw std::invalid_argument("OddRational: denominator must be odd");
  }

  /// Parses "p/q" or a bare odd integer "p".
  static OddRational parse(const std::string& text) {
    const auto slash = text.find('/');
    try {
      std::size_t used = 0;
      if (slash == std::string::npos) {
        const long long p = std::stoll(text, &used);
        if (used != text.size()) throw std::invalid_argument("trailing characters");
        return OddRational(p, 1);
      }
      const std::string ps = text.substr(0, slash);
      const std::string qs = text.substr(slash + 1);
      const long long p = std::stoll(ps, &used);
      if (used != ps.size()) throw std::invalid_argument("trailing characters");
      const long long q = std::stoll(qs, &used);
      if (used != qs.size()) throw std::invalid_argument("trailing characters");
      return OddRational(p, q);
    } catch (const std::out_of_range&) {
      throw std::invalid_argument("OddRational: value out of range: " + text);
    } catch (const std::invalid_argument& e) {
      const std::string what = e.what();
      if (what.rfind("OddRational", 0) == 0) throw;
      throw std::invalid_argument("OddRational: cannot parse '" + text + "'");
    }
  }

  std::int64_t p() const noexcept { return p_; }
  std::int64_t q() const noexcept { return q_; }
  double value() const noexcept { return static_cast<double>(p_) / static_cast<double>(q_); }
  std::string str() const { return std::to_string(p_) + "/" + std::to_string(q_); }

  friend bool operator==(const OddRational&, const OddRational&) = default;

 private:
  std::int64_t p_;
  std::int64_t q_;
};

/// Real odd power sign(x)|x|^tau.
inline double odd_pow(double x, const OddRational& tau) {
  if (x == 0.0) return 0.0;
  if (tau.q() == 1 && tau.p() == 1) return x;
  double mag;
  if (tau.q() == 1) {
    mag = std::pow(std::abs(x), static_cast<double>(tau.p()));
  } else if (tau.q() == 3) {
    mag = std::pow(std::cbrt(std::abs(x)), static_cast<double>(tau.p()));
  } else {
    mag = std::pow(std::abs(x), tau.value());
  }
  return std::signbit(x) ? -mag : mag;
}

}  // namespace cayley

#endif  // CAYLEY_ODD_RATIONAL_HPP
