#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace nchodge {

// All arithmetic in the library is exact; Rational is the ground field Q.
using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

inline Integer num(const Rational& r) { return boost::multiprecision::numerator(r); }
inline Integer den(const Rational& r) { return boost::multiprecision::denominator(r); }

inline Rational binomial(long n, long k) {
    if (k < 0 || k > n) return Rational(0);
    Integer r = 1;
    for (long i = 0; i < k; ++i) {
        r *= (n - i);
        r /= (i + 1);
    }
    return Rational(r);
}

inline std::string to_string(const Rational& r) {
    std::string s = num(r).str();
    if (den(r) != 1) s += "/" + den(r).str();
    return s;
}

}  // namespace nchodge
