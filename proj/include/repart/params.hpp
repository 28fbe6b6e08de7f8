#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include <boost/rational.hpp>

// Boost 1.74's mixed rational/integer operator== recurses forever under C++20 rewritten
// comparisons; these exact overloads take precedence over its templates.
namespace boost {
inline bool operator==(const rational<std::int64_t>& a, std::int64_t b) {
  return a.denominator() == 1 && a.numerator() == b;
}
inline bool operator==(const rational<std::int64_t>& a, int b) { return a == static_cast<std::int64_t>(b); }
}  // namespace boost

namespace repart {

using Rational = boost::rational<std::int64_t>;

// Rejected run configuration (bad parameters, unknown values, unreadable files).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A state that the algorithms guarantee can never happen was observed.
struct InvariantViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad external input such as an unknown vertex id in a trace.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Mode { Strict, Relaxed };

Rational parse_rational(const std::string& text);
std::string to_string(const Rational& q);
std::string to_string(Mode mode);
Mode parse_mode(const std::string& text);

// Largest delta = j/k below epsilon^2 with ceil_delta(1) - 1 <= delta/2.
Rational pick_delta(const Rational& epsilon, int k, Mode mode);

struct Params {
  int k = 0;
  int ell = 0;
  Rational epsilon;
  Rational delta;
  Mode mode = Mode::Relaxed;

  Rational gamma() const { return delta * 2; }
  int n() const { return k * ell; }

  // delta in 1/k units.
  int delta_units() const;
  // Size classes run 0..max_class().
  int max_class() const { return k / delta_units(); }
  int num_classes() const { return max_class() + 1; }
  // ceil_delta(1) in delta units.
  int ceil_one() const;
  // floor((1+gamma)/delta): the l1 bound of a gamma-valid reservation, in delta units.
  int reservation_budget() const;

  // units/k < epsilon
  bool below_epsilon(std::int64_t units) const;
  // units/k compared against epsilon * scale (exact).
  bool units_below(std::int64_t units, const Rational& factor) const;
  bool units_at_most(std::int64_t units, const Rational& factor) const;
};

// Validates and fills in delta. An explicit delta is only honoured in relaxed mode.
Params make_params(int k, int ell, const Rational& epsilon, Mode mode,
                   std::optional<Rational> delta = std::nullopt);

}  // namespace repart
