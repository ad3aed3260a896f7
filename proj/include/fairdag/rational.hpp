#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>

namespace fairdag {

/// Exact arbitrary-precision rational. All scheduling quantities (sizes,
/// weights, event times, rates, multipliers) are carried in this type.
using Rational = mpq_class;

using JobId = std::int64_t;

/// Parses "num/den", "num", or a finite decimal such as "0.25" into an exact
/// rational. Throws std::invalid_argument on anything else.
Rational parse_rational(std::string_view text);

/// Canonical "num/den" rendering; the denominator is always present.
std::string to_fraction_string(const Rational& value);

inline double to_double(const Rational& value) { return value.get_d(); }

/// 12-significant-digit float rendering used in CSV and table output.
std::string format_float(double value);

/// value^exponent for a non-negative integer exponent, computed exactly.
Rational pow_int(const Rational& value, unsigned long exponent);

inline bool is_integer(const Rational& value) { return value.get_den() == 1; }

}  // namespace fairdag
