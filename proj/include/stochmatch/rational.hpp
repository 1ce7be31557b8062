#pragma once

#include <cctype>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>

#include "error.hpp"

namespace stochmatch {

/// Non-negative exact fraction num/den in lowest terms. Used for epsilon so
/// that every threshold comparison can be done by cross-multiplication.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational make(std::int64_t n, std::int64_t d) {
    if (d == 0) throw Error(ErrorCode::BadFormat, "zero denominator");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    const std::int64_t g = std::gcd(n < 0 ? -n : n, d);
    return Rational{n / (g == 0 ? 1 : g), d / (g == 0 ? 1 : g)};
  }

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

  std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }

  friend bool operator==(const Rational&, const Rational&) = default;
};

/// ceil(a / b) for a >= 0, b > 0.
inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

/// Accepts "a/b", an integer, or a plain decimal such as "0.125".
inline Rational parse_rational(std::string_view text) {
  auto bad = [&] { return Error(ErrorCode::BadFormat, "not a rational: '" + std::string(text) + "'"); };
  if (text.empty()) throw bad();
  auto digits = [&](std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
  };
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    auto a = text.substr(0, slash);
    auto b = text.substr(slash + 1);
    if (!digits(a) || !digits(b) || a.size() > 15 || b.size() > 15) throw bad();
    return Rational::make(std::stoll(std::string(a)), std::stoll(std::string(b)));
  }
  auto dot = text.find('.');
  auto whole = text.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if ((!whole.empty() && !digits(whole)) || (!frac.empty() && !digits(frac))) throw bad();
  if (whole.empty() && frac.empty()) throw bad();
  if (whole.size() + frac.size() > 15) throw bad();
  std::int64_t den = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
  std::int64_t num = (whole.empty() ? 0 : std::stoll(std::string(whole))) * den +
                     (frac.empty() ? 0 : std::stoll(std::string(frac)));
  return Rational::make(num, den);
}

/// Validates 0 < eps < 1.
inline Rational checked_epsilon(Rational eps) {
  if (eps.num <= 0 || eps.num >= eps.den)
    throw Error(ErrorCode::BadEpsilon, "epsilon must lie in (0,1), got " + eps.str());
  return eps;
}

}  // namespace stochmatch
