#pragma once

#include <cctype>
#include <optional>
#include <string>

#include "mellin/errors.hpp"
#include "mellin/series.hpp"

namespace mellin {

namespace detail {

template <class K>
K imaginary_unit(std::size_t err_pos) {
    throw SyntaxError("imaginary literals require approx mode", err_pos);
}
template <>
inline Complex imaginary_unit<Complex>(std::size_t) {
    return Complex{Real(0), Real(1)};
}

template <class K>
class SeriesParser {
public:
    explicit SeriesParser(const std::string& text) : text_(text) {}

    Series<K> parse() {
        Series<K> value = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) throw SyntaxError("unexpected trailing input", pos_);
        if (!seen_var_) {
            // A pure-constant expression is a series in z by convention.
            value.var = Var::Z;
        }
        return value;
    }

private:
    using FT = field_traits<K>;

    Series<K> parse_expr() {
        skip_ws();
        bool neg = false;
        if (peek() == '-') {
            neg = true;
            ++pos_;
        } else if (peek() == '+') {
            ++pos_;
        }
        Series<K> acc = parse_term();
        if (neg) acc = -acc;
        while (true) {
            skip_ws();
            char c = peek();
            if (c != '+' && c != '-') break;
            ++pos_;
            Series<K> t = parse_term();
            harmonize(acc, t);
            acc = c == '+' ? acc + t : acc - t;
        }
        return acc;
    }

    Series<K> parse_term() {
        Series<K> acc = parse_factor();
        while (true) {
            skip_ws();
            if (peek() != '*') break;
            ++pos_;
            Series<K> f = parse_factor();
            harmonize(acc, f);
            acc = acc * f;
        }
        return acc;
    }

    // Numeric literals are variable-neutral constants; adopt the other side's
    // variable before combining (genuine variable mixes are caught earlier).
    static bool is_plain_constant(const Series<K>& s) {
        return s.is_exact() && s.ram == 1 &&
               (s.terms.empty() || (s.terms.size() == 1 && s.terms.begin()->first == 0));
    }
    static void harmonize(Series<K>& a, Series<K>& b) {
        if (a.var == b.var) return;
        if (is_plain_constant(a))
            a.var = b.var;
        else if (is_plain_constant(b))
            b.var = a.var;
    }

    Series<K> parse_factor() {
        skip_ws();
        char c = peek();
        if (c == '(') {
            ++pos_;
            Series<K> inner = parse_expr();
            expect(')');
            skip_ws();
            if (peek() == '^') throw SyntaxError("exponent requires a variable base", pos_);
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        throw SyntaxError("expected a number, variable, or parenthesized expression", pos_);
    }

    Series<K> parse_number() {
        std::size_t start = pos_;
        Rational value = field_traits<Rational>::parse_prefix(text_, pos_);
        K coef = FT::from_rational(value);
        if (peek() == 'i' && !is_ident_char(peek_at(pos_ + 1))) {
            ++pos_;
            coef = coef * imaginary_unit<K>(start);
        }
        return Series<K>::constant(Var::Z, coef);
    }

    Series<K> parse_identifier() {
        std::size_t start = pos_;
        std::string name = take_identifier();
        if (name == "i")
            return Series<K>::constant(Var::Z, imaginary_unit<K>(start));
        if (name == "O") return parse_order_term(start);
        std::optional<Var> v = var_from_name(name);
        if (!v) {
            if (seen_var_)
                throw MixedVariables("series mixes variables '" +
                                         std::string(var_name(*seen_var_)) + "' and '" + name + "'",
                                     start);
            throw SyntaxError("unknown identifier '" + name + "'", start);
        }
        note_var(*v, start);
        Rational e(1);
        skip_ws();
        if (peek() == '^') {
            ++pos_;
            e = parse_exponent();
        }
        long long num = static_cast<long long>(numerator(e));
        long long den = static_cast<long long>(denominator(e));
        return Series<K>::monomial(*v, FT::one(), num, den);
    }

    Series<K> parse_order_term(std::size_t start) {
        expect('(');
        skip_ws();
        std::string name = take_identifier();
        std::optional<Var> v = var_from_name(name);
        if (!v) throw SyntaxError("expected a variable inside O(...)", start);
        note_var(*v, start);
        Rational e(1);
        skip_ws();
        if (peek() == '^') {
            ++pos_;
            e = parse_exponent();
        }
        expect(')');
        long long num = static_cast<long long>(numerator(e));
        long long den = static_cast<long long>(denominator(e));
        return Series<K>::zero(*v, den, num);
    }

    Rational parse_exponent() {
        skip_ws();
        if (peek() == '(') {
            ++pos_;
            skip_ws();
            Rational e = field_traits<Rational>::parse_prefix(text_, pos_);
            expect(')');
            return e;
        }
        if (!std::isdigit(static_cast<unsigned char>(peek())))
            throw SyntaxError("fractional or negative exponents must be parenthesized", pos_);
        std::size_t start = pos_;
        while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
        return Rational(Integer(text_.substr(start, pos_ - start)));
    }

    static std::optional<Var> var_from_name(const std::string& name) {
        if (name == "z") return Var::Z;
        if (name == "zx") return Var::Zx;
        if (name == "zeta") return Var::Zeta;
        if (name == "theta") return Var::Theta;
        return std::nullopt;
    }

    void note_var(Var v, std::size_t where) {
        if (seen_var_ && *seen_var_ != v)
            throw MixedVariables("series mixes variables '" + std::string(var_name(*seen_var_)) +
                                     "' and '" + var_name(v) + "'",
                                 where);
        seen_var_ = v;
    }

    std::string take_identifier() {
        std::size_t start = pos_;
        while (is_ident_char(peek())) ++pos_;
        if (start == pos_) throw SyntaxError("expected an identifier", pos_);
        return text_.substr(start, pos_ - start);
    }

    static bool is_ident_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
    char peek_at(std::size_t p) const { return p < text_.size() ? text_[p] : '\0'; }
    void expect(char c) {
        skip_ws();
        if (peek() != c) throw SyntaxError(std::string("expected '") + c + "'", pos_);
        ++pos_;
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    std::optional<Var> seen_var_;
};

}  // namespace detail

template <class K>
Series<K> parse_series(const std::string& text) {
    return detail::SeriesParser<K>(text).parse();
}

namespace detail {

// True when the formatted coefficient needs parentheses inside a product.
inline bool needs_parens(const std::string& s) {
    for (std::size_t i = 1; i < s.size(); ++i)
        if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') return true;
    return false;
}

inline std::string format_exponent(const char* var, const Rational& e) {
    if (e == 1) return var;
    return std::string(var) + "^(" + field_traits<Rational>::format(e) + ")";
}

// Splits a coefficient into (is_negative, magnitude-string) for +/- joining.
template <class K>
std::pair<bool, std::string> signed_coefficient(const K& c);

template <>
inline std::pair<bool, std::string> signed_coefficient(const Rational& c) {
    bool neg = c < 0;
    return {neg, field_traits<Rational>::format(neg ? Rational(-c) : c)};
}

template <>
inline std::pair<bool, std::string> signed_coefficient(const Complex& c) {
    bool neg = (c.im == 0 && c.re < 0) || (c.re == 0 && c.im < 0);
    return {neg, field_traits<Complex>::format(neg ? -c : c)};
}

}  // namespace detail

template <class K>
std::string format_series(const Series<K>& s) {
    std::string out;
    const char* v = var_name(s.var);
    bool first = true;
    for (auto& [k, c] : s.terms) {
        auto [neg, mag] = detail::signed_coefficient(c);
        if (detail::needs_parens(mag)) mag = "(" + mag + ")";
        std::string body;
        if (k == 0) {
            body = mag;
        } else {
            std::string e = detail::format_exponent(v, Rational(k, s.ram));
            body = mag == "1" ? e : mag + "*" + e;
        }
        if (first) {
            out += neg ? "-" + body : body;
            first = false;
        } else {
            out += neg ? " - " + body : " + " + body;
        }
    }
    if (first && !s.trunc) return "0";
    if (s.trunc) {
        std::string o = "O(" + detail::format_exponent(v, Rational(*s.trunc, s.ram)) + ")";
        out += first ? o : " + " + o;
    }
    return out;
}

}  // namespace mellin
