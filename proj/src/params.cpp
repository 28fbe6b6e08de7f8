#include "repart/params.hpp"

#include <cstdlib>
#include <sstream>

namespace repart {

namespace {

bool delta_rounding_ok(int k, int j) {
  // ceil(k/j)*j - k <= j/2
  std::int64_t up = (static_cast<std::int64_t>(k) + j - 1) / j * j;
  return 2 * (up - k) <= j;
}

}  // namespace

Rational parse_rational(const std::string& text) {
  auto slash = text.find('/');
  try {
    std::size_t used = 0;
    if (slash == std::string::npos) {
      if (text.find('.') != std::string::npos) {
        // Decimal literal, read exactly.
        auto dot = text.find('.');
        std::string whole = text.substr(0, dot);
        std::string frac = text.substr(dot + 1);
        if (frac.empty() || frac.size() > 12) throw ConfigError("bad rational: " + text);
        std::int64_t den = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
        bool neg = !whole.empty() && whole[0] == '-';
        std::int64_t w = whole.empty() || whole == "-" ? 0 : std::stoll(whole, &used);
        std::int64_t f = std::stoll(frac);
        std::int64_t num = std::llabs(w) * den + f;
        return Rational(neg ? -num : num, den);
      }
      std::int64_t v = std::stoll(text, &used);
      if (used != text.size()) throw ConfigError("bad rational: " + text);
      return Rational(v);
    }
    std::int64_t num = std::stoll(text.substr(0, slash), &used);
    if (used != slash) throw ConfigError("bad rational: " + text);
    std::string rest = text.substr(slash + 1);
    std::int64_t den = std::stoll(rest, &used);
    if (used != rest.size() || den == 0) throw ConfigError("bad rational: " + text);
    return Rational(num, den);
  } catch (const std::logic_error&) {
    throw ConfigError("bad rational: " + text);
  }
}

std::string to_string(const Rational& q) {
  std::ostringstream out;
  out << q.numerator();
  if (q.denominator() != 1) out << '/' << q.denominator();
  return out.str();
}

std::string to_string(Mode mode) { return mode == Mode::Strict ? "strict" : "relaxed"; }

Mode parse_mode(const std::string& text) {
  if (text == "strict") return Mode::Strict;
  if (text == "relaxed") return Mode::Relaxed;
  throw ConfigError("unknown mode: " + text);
}

Rational pick_delta(const Rational& epsilon, int k, Mode mode) {
  if (k <= 0) throw ConfigError("k must be positive");
  if (epsilon <= 0) throw ConfigError("epsilon must be positive");
  Rational eps2 = epsilon * epsilon;
  if (mode == Mode::Strict) {
    if (epsilon >= Rational(1, 4)) throw ConfigError("strict mode needs epsilon < 1/4");
    // k >= 10/eps^4  <=>  k * eps^4 >= 10
    if (Rational(k) * eps2 * eps2 < 10) throw ConfigError("strict mode needs k >= 10/epsilon^4");
  }
  // Largest j with j/k <= eps^2.
  std::int64_t j = boost::rational_cast<std::int64_t>(eps2 * k);
  for (; j >= 1; --j) {
    if (delta_rounding_ok(k, static_cast<int>(j))) break;
  }
  if (j < 1) throw ConfigError("no feasible delta for epsilon=" + to_string(epsilon) + ", k=" + std::to_string(k));
  Rational delta(j, k);
  if (mode == Mode::Strict && delta < eps2 / 2)
    throw InvariantViolation("picked delta below epsilon^2/2 in strict mode");
  return delta;
}

int Params::delta_units() const { return static_cast<int>((delta * k).numerator()); }

int Params::ceil_one() const {
  int j = delta_units();
  return (k + j - 1) / j;
}

int Params::reservation_budget() const {
  // (1+gamma)/delta = k/j + 2
  return k / delta_units() + 2;
}

bool Params::below_epsilon(std::int64_t units) const { return Rational(units, k) < epsilon; }

bool Params::units_below(std::int64_t units, const Rational& factor) const {
  return Rational(units, k) < factor;
}

bool Params::units_at_most(std::int64_t units, const Rational& factor) const {
  return Rational(units, k) <= factor;
}

Params make_params(int k, int ell, const Rational& epsilon, Mode mode, std::optional<Rational> delta) {
  if (k <= 0) throw ConfigError("k must be positive");
  if (ell <= 0) throw ConfigError("ell must be positive");
  if (epsilon <= 0) throw ConfigError("epsilon must be positive");
  if (mode == Mode::Relaxed && epsilon >= Rational(1, 2))
    throw ConfigError("relaxed mode needs epsilon < 1/2");
  Params p;
  p.k = k;
  p.ell = ell;
  p.epsilon = epsilon;
  p.mode = mode;
  if (delta) {
    if (mode == Mode::Strict) throw ConfigError("explicit delta is only accepted in relaxed mode");
    Rational d = *delta;
    if (d <= 0 || (d * k).denominator() != 1) throw ConfigError("delta must be a positive multiple of 1/k");
    if (d > epsilon * epsilon) throw ConfigError("delta must not exceed epsilon^2");
    int j = static_cast<int>((d * k).numerator());
    if (!delta_rounding_ok(k, j)) throw ConfigError("delta violates ceil(1) - 1 <= delta/2");
    p.delta = d;
  } else {
    p.delta = pick_delta(epsilon, k, mode);
  }
  if (p.gamma() >= 1) throw ConfigError("gamma = 2 delta must be below 1");
  return p;
}

}  // namespace repart
