#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace regrisk {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// Parses "3", "-4.2", "21/5", "1e-3" into an exact rational.
Rational parse_rational(const std::string& text);

std::string to_string(const Rational& r);

inline double to_double(const Rational& r) { return r.convert_to<double>(); }
inline double to_double(double x) { return x; }

}  // namespace regrisk
