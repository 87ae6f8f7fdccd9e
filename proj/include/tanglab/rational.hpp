#ifndef TANGLAB_RATIONAL_HPP
#define TANGLAB_RATIONAL_HPP

#include <boost/multiprecision/gmp.hpp>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace tanglab {

// Exact arithmetic backend. All constructions and verifications at desk scale
// run on this type; `double` instantiations of the same templates mirror the
// computations for long orbit statistics.
using Rat = boost::multiprecision::mpq_rational;

inline double to_double(const Rat& x) { return x.convert_to<double>(); }
inline double to_double(double x) { return x; }

template <class S>
inline S rat_const(long num, long den) {
    if constexpr (std::is_same_v<S, double>) return double(num) / double(den);
    else return Rat(num, den);
}

template <class S> S from_rat(const Rat& q);
template <> inline Rat from_rat<Rat>(const Rat& q) { return q; }
template <> inline double from_rat<double>(const Rat& q) { return q.convert_to<double>(); }

template <class S>
inline S sabs(const S& x) { return x < S(0) ? S(-x) : x; }

// x^n for integer n (n may be negative for invertible x).
template <class S>
S spow(S x, long n) {
    if (n < 0) { x = S(1) / x; n = -n; }
    S r(1);
    while (n > 0) {
        if (n & 1) r *= x;
        x *= x;
        n >>= 1;
    }
    return r;
}

// Parse "p/q" or "p" into an exact rational.  Whitespace is not tolerated;
// the config reader trims before calling.
inline std::optional<Rat> parse_rational(const std::string& s) {
    if (s.empty()) return std::nullopt;
    try {
        auto slash = s.find('/');
        if (slash == std::string::npos) {
            // allow decimal literals like "0.29" for convenience
            auto dot = s.find('.');
            if (dot == std::string::npos) return Rat(s);
            std::string digits = s.substr(0, dot) + s.substr(dot + 1);
            bool neg = false;
            if (!digits.empty() && (digits[0] == '+' || digits[0] == '-')) {
                neg = digits[0] == '-';
                digits = digits.substr(1);
            }
            if (digits.empty()) return std::nullopt;
            Rat num(digits);
            Rat den = spow(Rat(10), long(s.size() - dot - 1));
            Rat r = num / den;
            return neg ? Rat(-r) : r;
        }
        Rat num(s.substr(0, slash));
        Rat den(s.substr(slash + 1));
        if (den == 0) return std::nullopt;
        return num / den;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

inline std::string to_string(const Rat& x) { return x.str(); }

} // namespace tanglab

#endif
