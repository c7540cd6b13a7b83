#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/mpfr.hpp>
#include <mpfr.h>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "mellin/errors.hpp"

namespace mellin {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using Real = boost::multiprecision::mpfr_float;

enum class FieldMode { Exact, Approx };

// Global scalar-field configuration. Approx-mode arithmetic uses MPFR reals at
// precision_bits; comparisons use the relative tolerance.
struct FieldConfig {
    FieldMode mode = FieldMode::Exact;
    unsigned precision_bits = 192;
    double tolerance = 1e-20;

    void validate() const {
        if (precision_bits == 0) throw std::invalid_argument("precision_bits must be positive");
        if (!(tolerance > 0)) throw std::invalid_argument("tolerance must be positive");
        // A tolerance below the precision's resolving power is inconsistent.
        if (std::log2(tolerance) < -0.5 * static_cast<double>(precision_bits))
            throw std::invalid_argument("tolerance finer than 2^(-precision_bits/2) is inconsistent");
    }

    void activate() const;
};

inline FieldConfig& current_config() {
    static FieldConfig cfg;
    return cfg;
}

inline void FieldConfig::activate() const {
    validate();
    unsigned digits10 = static_cast<unsigned>(std::ceil(precision_bits * 0.30103)) + 2;
    Real::default_precision(digits10);
    mpfr_set_default_prec(static_cast<mpfr_prec_t>(precision_bits) + 8);
    current_config() = *this;
}

inline Real to_real(const Rational& r) {
    return Real(numerator(r).str()) / Real(denominator(r).str());
}

inline Real real_pi() {
    Real out(0);  // carries the active working precision
    mpfr_const_pi(out.backend().data(), MPFR_RNDN);
    return out;
}

inline Real tolerance_real() { return Real(current_config().tolerance); }

inline Integer rational_floor(const Rational& x) {
    Integer n = numerator(x), d = denominator(x);
    Integer q = n / d, r = n % d;
    if (r != 0 && n < 0) --q;
    return q;
}

// Largest integer r >= 0 with r^n <= v, for v >= 0.
inline Integer integer_nth_root_floor(const Integer& v, long long n) {
    if (v < 0) throw std::invalid_argument("integer_nth_root_floor: negative input");
    if (v == 0 || v == 1 || n == 1) return v;
    unsigned bits = boost::multiprecision::msb(v) + 1;
    Integer hi = Integer(1) << (bits / static_cast<unsigned>(n) + 2);
    Integer lo = 0;
    while (lo < hi) {
        Integer mid = (lo + hi + 1) / 2;
        if (boost::multiprecision::pow(mid, static_cast<unsigned>(n)) <= v)
            lo = mid;
        else
            hi = mid - 1;
    }
    return lo;
}

struct Complex {
    Real re, im;

    Complex() : re(0), im(0) {}
    Complex(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}
    explicit Complex(long long v) : re(v), im(0) {}

    Complex operator+(const Complex& o) const { return {re + o.re, im + o.im}; }
    Complex operator-(const Complex& o) const { return {re - o.re, im - o.im}; }
    Complex operator-() const { return {-re, -im}; }
    Complex operator*(const Complex& o) const {
        return {re * o.re - im * o.im, re * o.im + im * o.re};
    }
    Real norm2() const { return re * re + im * im; }
    Complex inverse() const {
        Real n = norm2();
        if (n == 0) throw DomainError("DivisionByZero", "inverse of exact zero");
        return {re / n, -im / n};
    }
    Complex operator/(const Complex& o) const { return *this * o.inverse(); }
    bool operator==(const Complex& o) const { return re == o.re && im == o.im; }
};

template <class K>
struct field_traits;

template <>
struct field_traits<Rational> {
    static constexpr bool exact = true;

    static Rational zero() { return Rational(0); }
    static Rational one() { return Rational(1); }
    static Rational from_int(long long v) { return Rational(v); }
    static Rational from_rational(const Rational& r) { return r; }
    static Rational rational_value(const Rational& r) { return r; }

    static bool is_zero(const Rational& a) { return a == 0; }
    static bool equal(const Rational& a, const Rational& b) { return a == b; }
    static bool less(const Rational& a, const Rational& b) { return a < b; }
    static Rational inverse(const Rational& a) {
        if (a == 0) throw DomainError("DivisionByZero", "inverse of zero");
        return Rational(1) / a;
    }

    // Exact n-th root at the requested branch. The only rational branch factors are
    // +1 and -1; other branches of a nonzero base have no rational value.
    static Rational nth_root(const Rational& a, long long n, long long branch,
                             bool allow_zero = false) {
        if (n <= 0) throw std::invalid_argument("nth_root: n must be positive");
        if (a == 0) {
            if (!allow_zero) throw ZeroRoot("0 has no invertible n-th root");
            return Rational(0);
        }
        bool negative = a < 0;
        if (negative && n % 2 == 0)
            throw NoExactRoot("even root of a negative rational; use approx mode");
        Integer num = boost::multiprecision::abs(numerator(a));
        Integer den = denominator(a);
        Integer rn = integer_nth_root_floor(num, n);
        Integer rd = integer_nth_root_floor(den, n);
        if (boost::multiprecision::pow(rn, static_cast<unsigned>(n)) != num ||
            boost::multiprecision::pow(rd, static_cast<unsigned>(n)) != den)
            throw NoExactRoot("no exact rational n-th root; use approx mode");
        Rational root(rn, rd);
        if (negative) root = -root;
        long long b = ((branch % n) + n) % n;
        if (b == 0) return root;
        if (n % 2 == 0 && b == n / 2) return -root;
        throw NoExactRoot("requested branch factor is not rational");
    }

    // zeta_q^(jk) when rational: +1, -1, or nothing (a non-rational root of unity).
    static std::optional<Rational> root_of_unity_factor(long long jk, long long q) {
        long long r = ((jk % q) + q) % q;
        if (r == 0) return Rational(1);
        if (q % 2 == 0 && r == q / 2) return Rational(-1);
        return std::nullopt;
    }

    static Rational parse(const std::string& text) {
        std::size_t pos = 0;
        Rational v = parse_prefix(text, pos);
        if (pos != text.size()) throw SyntaxError("trailing characters in rational literal", pos);
        return v;
    }

    // Parses sign? digits ('/' digits | '.' digits)? starting at pos.
    static Rational parse_prefix(const std::string& text, std::size_t& pos) {
        std::size_t start = pos;
        bool neg = false;
        if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
            neg = text[pos] == '-';
            ++pos;
        }
        std::string digits = take_digits(text, pos);
        if (digits.empty()) throw SyntaxError("expected a number", start);
        Rational value;
        if (pos < text.size() && text[pos] == '/') {
            ++pos;
            std::string den = take_digits(text, pos);
            if (den.empty()) throw SyntaxError("expected denominator digits", pos);
            if (Integer(den) == 0) throw SyntaxError("zero denominator", pos);
            value = Rational(Integer(digits), Integer(den));
        } else if (pos < text.size() && text[pos] == '.') {
            ++pos;
            std::string frac = take_digits(text, pos);
            if (frac.empty()) throw SyntaxError("expected digits after decimal point", pos);
            Integer scale = boost::multiprecision::pow(Integer(10), static_cast<unsigned>(frac.size()));
            value = Rational(Integer(digits) * scale + Integer(frac), scale);
        } else {
            value = Rational(Integer(digits));
        }
        return neg ? -value : value;
    }

    static std::string format(const Rational& a) {
        if (denominator(a) == 1) return numerator(a).str();
        return numerator(a).str() + "/" + denominator(a).str();
    }

private:
    static std::string take_digits(const std::string& text, std::size_t& pos) {
        std::size_t start = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        return text.substr(start, pos - start);
    }
};

template <>
struct field_traits<Complex> {
    static constexpr bool exact = false;

    static Complex zero() { return Complex(); }
    static Complex one() { return Complex(1); }
    static Complex from_int(long long v) { return Complex(v); }
    static Complex from_rational(const Rational& r) { return {to_real(r), Real(0)}; }
    static Rational rational_value(const Complex&) {
        throw DomainError("NotRational", "approx coefficients have no exact rational value");
    }

    static bool is_zero(const Complex& a) {
        Real t = tolerance_real();
        return a.norm2() <= t * t;
    }

    // Relative tolerance equality: |a-b| <= tau * max(1, |a|, |b|).
    static bool equal(const Complex& a, const Complex& b) {
        Real t = tolerance_real();
        Real scale = Real(1);
        scale = std::max(scale, a.norm2());
        scale = std::max(scale, b.norm2());
        return (a - b).norm2() <= t * t * scale;
    }

    static bool less(const Complex& a, const Complex& b) {
        if (a.re != b.re) return a.re < b.re;
        return a.im < b.im;
    }

    static Complex inverse(const Complex& a) { return a.inverse(); }

    // Principal root: the branch with the smallest non-negative argument; branch b
    // multiplies by e^(2*pi*i*b/n).
    static Complex nth_root(const Complex& a, long long n, long long branch,
                            bool allow_zero = false) {
        if (n <= 0) throw std::invalid_argument("nth_root: n must be positive");
        if (is_zero(a)) {
            if (!allow_zero) throw ZeroRoot("0 has no invertible n-th root");
            return zero();
        }
        Real r = sqrt(a.norm2());
        Real phi = atan2(a.im, a.re);
        Real two_pi = 2 * real_pi();
        if (phi < 0) phi += two_pi;
        Real psi = phi / n + two_pi * branch / n;
        Real mag = pow(r, Real(1) / n);
        return {mag * cos(psi), mag * sin(psi)};
    }

    static std::optional<Complex> root_of_unity_factor(long long jk, long long q) {
        Real angle = 2 * real_pi() * jk / q;
        return Complex{cos(angle), sin(angle)};
    }

    static Complex parse(const std::string& text) {
        if (text.empty()) throw SyntaxError("empty number", 0);
        if (text.find('/') != std::string::npos)
            return from_rational(field_traits<Rational>::parse(text));
        std::size_t ipos = text.find('i');
        if (ipos == std::string::npos) return {parse_real(text, 0), Real(0)};
        if (ipos + 1 != text.size()) throw SyntaxError("malformed complex literal", ipos);
        std::string body = text.substr(0, text.size() - 1);
        // Split at the last '+'/'-' that is not leading and not an exponent sign.
        std::size_t split = std::string::npos;
        for (std::size_t p = body.size(); p-- > 1;) {
            if ((body[p] == '+' || body[p] == '-') && body[p - 1] != 'e' && body[p - 1] != 'E') {
                split = p;
                break;
            }
        }
        if (split == std::string::npos) {
            if (body.empty() || body == "+") return {Real(0), Real(1)};
            if (body == "-") return {Real(0), Real(-1)};
            return {Real(0), parse_real(body, 0)};
        }
        std::string imag = body.substr(split);
        if (imag == "+") imag = "1";
        if (imag == "-") imag = "-1";
        return {parse_real(body.substr(0, split), 0), parse_real(imag, split)};
    }

    static std::string format(const Complex& a) {
        if (a.im == 0) return format_real(a.re);
        std::string im_part = format_real(abs(a.im)) + "i";
        if (a.re == 0) return (a.im < 0 ? "-" : "") + im_part;
        return format_real(a.re) + (a.im < 0 ? "-" : "+") + im_part;
    }

    static std::string format_real(const Real& x) {
        if (x == 0) return "0";
        return x.str();
    }

private:
    static Real parse_real(const std::string& text, std::size_t err_pos) {
        try {
            return Real(text);
        } catch (const std::exception&) {
            throw SyntaxError("malformed numeric literal '" + text + "'", err_pos);
        }
    }
};

template <class K>
K pow_int(const K& base, long long e) {
    using FT = field_traits<K>;
    if (e == 0) return FT::one();
    K b = e < 0 ? FT::inverse(base) : base;
    unsigned long long n = e < 0 ? static_cast<unsigned long long>(-(e + 1)) + 1
                                 : static_cast<unsigned long long>(e);
    K acc = FT::one();
    while (n > 0) {
        if (n & 1) acc = acc * b;
        b = b * b;
        n >>= 1;
    }
    return acc;
}

inline long long llgcd(long long a, long long b) { return std::gcd(a, b); }
inline long long lllcm(long long a, long long b) { return std::lcm(a, b); }

}  // namespace mellin
