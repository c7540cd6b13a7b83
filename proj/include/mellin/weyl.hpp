#pragma once

// Normal-form arithmetic in two noncommutative algebras and the global
// transform between them:
//
//   domain  k[z, z^(-1)]<Del>   with  Del·z = z·Del + 1
//   target  k[eta]<Phi, Phi^(-1)> with  Phi·eta = (eta + 1)·Phi
//
// Elements are stored in normal form (z-powers left of Del-powers,
// eta-powers left of Phi-powers), so every constructor and product
// re-normalizes and equality is plain term-map comparison.  The transform
// sends z to Phi and z·Del to -eta, hence Del to -Phi^(-1)·eta, and is an
// algebra homomorphism.

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mellin/errors.hpp"
#include "mellin/field.hpp"

namespace mellin {

namespace weyl_detail {

// Exponent pair (i, j): z^i Del^j in the domain, eta^i Phi^j in the target.
using Key = std::pair<long long, long long>;

template <class K>
using TermMap = std::map<Key, K>;

template <class K>
void add_term(TermMap<K>& m, Key key, const K& c) {
    using FT = field_traits<K>;
    auto it = m.find(key);
    if (it == m.end()) {
        if (!FT::is_zero(c)) m.emplace(key, c);
        return;
    }
    it->second = it->second + c;
    if (FT::is_zero(it->second)) m.erase(it);
}

// C(n, t) computed in the field so large intermediates stay exact.
template <class K>
K binom(long long n, long long t) {
    using FT = field_traits<K>;
    K acc = FT::one();
    for (long long s = 0; s < t; ++s)
        acc = acc * FT::from_int(n - s) * FT::inverse(FT::from_int(s + 1));
    return acc;
}

// Falling factorial k(k-1)...(k-t+1); valid for negative k as well.
template <class K>
K falling(long long k, long long t) {
    using FT = field_traits<K>;
    K acc = FT::one();
    for (long long s = 0; s < t; ++s) acc = acc * FT::from_int(k - s);
    return acc;
}

}  // namespace weyl_detail

// ---------------------------------------------------------------------------
// Domain algebra: finite sums of c·z^i·Del^j, i in Z, j in N.
// ---------------------------------------------------------------------------

template <class K>
struct DomainElement {
    weyl_detail::TermMap<K> terms;

    static DomainElement zero() { return {}; }
    static DomainElement term(const K& c, long long i, long long j) {
        if (j < 0) throw std::invalid_argument("negative derivation power");
        DomainElement e;
        weyl_detail::add_term(e.terms, {i, j}, c);
        return e;
    }
    static DomainElement constant(const K& c) { return term(c, 0, 0); }
    static DomainElement z_pow(long long i) { return term(field_traits<K>::one(), i, 0); }
    static DomainElement del() { return term(field_traits<K>::one(), 0, 1); }

    bool is_zero() const { return terms.empty(); }

    friend bool operator==(const DomainElement& a, const DomainElement& b) {
        if (a.terms.size() != b.terms.size()) return false;
        auto it = b.terms.begin();
        for (auto& [k, c] : a.terms) {
            if (it->first != k || !field_traits<K>::equal(it->second, c)) return false;
            ++it;
        }
        return true;
    }

    friend DomainElement operator+(const DomainElement& a, const DomainElement& b) {
        DomainElement out = a;
        for (auto& [k, c] : b.terms) weyl_detail::add_term(out.terms, k, c);
        return out;
    }
    friend DomainElement operator-(const DomainElement& a, const DomainElement& b) {
        DomainElement out = a;
        for (auto& [k, c] : b.terms) weyl_detail::add_term(out.terms, k, K(-c));
        return out;
    }
    friend DomainElement operator-(const DomainElement& a) {
        return DomainElement::zero() - a;
    }

    // Del^j1 · z^i2 = sum_t C(j1,t) · i2^(falling t) · z^(i2-t) · Del^(j1-t)
    friend DomainElement operator*(const DomainElement& a, const DomainElement& b) {
        DomainElement out;
        for (auto& [ka, ca] : a.terms)
            for (auto& [kb, cb] : b.terms) {
                auto [i1, j1] = ka;
                auto [i2, j2] = kb;
                for (long long t = 0; t <= j1; ++t) {
                    K c = ca * cb * weyl_detail::binom<K>(j1, t) *
                          weyl_detail::falling<K>(i2, t);
                    weyl_detail::add_term(out.terms, {i1 + i2 - t, j1 + j2 - t}, c);
                }
            }
        return out;
    }
};

// ---------------------------------------------------------------------------
// Target algebra: finite sums of c·eta^i·Phi^j, i in N, j in Z.
// ---------------------------------------------------------------------------

template <class K>
struct TargetElement {
    weyl_detail::TermMap<K> terms;

    static TargetElement zero() { return {}; }
    static TargetElement term(const K& c, long long i, long long j) {
        if (i < 0) throw std::invalid_argument("negative shift-variable power");
        TargetElement e;
        weyl_detail::add_term(e.terms, {i, j}, c);
        return e;
    }
    static TargetElement constant(const K& c) { return term(c, 0, 0); }
    static TargetElement eta_pow(long long i) { return term(field_traits<K>::one(), i, 0); }
    static TargetElement phi_pow(long long j) { return term(field_traits<K>::one(), 0, j); }

    bool is_zero() const { return terms.empty(); }

    friend bool operator==(const TargetElement& a, const TargetElement& b) {
        if (a.terms.size() != b.terms.size()) return false;
        auto it = b.terms.begin();
        for (auto& [k, c] : a.terms) {
            if (it->first != k || !field_traits<K>::equal(it->second, c)) return false;
            ++it;
        }
        return true;
    }

    friend TargetElement operator+(const TargetElement& a, const TargetElement& b) {
        TargetElement out = a;
        for (auto& [k, c] : b.terms) weyl_detail::add_term(out.terms, k, c);
        return out;
    }
    friend TargetElement operator-(const TargetElement& a, const TargetElement& b) {
        TargetElement out = a;
        for (auto& [k, c] : b.terms) weyl_detail::add_term(out.terms, k, K(-c));
        return out;
    }
    friend TargetElement operator-(const TargetElement& a) {
        return TargetElement::zero() - a;
    }

    // Phi^j1 · eta^i2 = (eta + j1)^i2 · Phi^j1; expand the binomial.
    friend TargetElement operator*(const TargetElement& a, const TargetElement& b) {
        using FT = field_traits<K>;
        TargetElement out;
        for (auto& [ka, ca] : a.terms)
            for (auto& [kb, cb] : b.terms) {
                auto [i1, j1] = ka;
                auto [i2, j2] = kb;
                for (long long t = 0; t <= i2; ++t) {
                    K c = ca * cb * weyl_detail::binom<K>(i2, t) *
                          pow_int<K>(FT::from_int(j1), i2 - t);
                    weyl_detail::add_term(out.terms, {i1 + t, j1 + j2}, c);
                }
            }
        return out;
    }
};

// Elements are stored normalized; exposed for symmetry with the contract.
template <class K>
DomainElement<K> normalize(const DomainElement<K>& e) { return e; }
template <class K>
TargetElement<K> normalize(const TargetElement<K>& e) { return e; }

// ---------------------------------------------------------------------------
// The global transform: z -> Phi, z·Del -> -eta, hence Del -> -Phi^(-1)·eta.
// ---------------------------------------------------------------------------

template <class K>
TargetElement<K> global_mellin(const DomainElement<K>& e) {
    using FT = field_traits<K>;
    const TargetElement<K> del_image =
        TargetElement<K>::term(K(-FT::one()), 0, -1) * TargetElement<K>::eta_pow(1);
    TargetElement<K> out;
    for (auto& [key, c] : e.terms) {
        auto [i, j] = key;
        TargetElement<K> img = TargetElement<K>::term(c, 0, i);
        for (long long s = 0; s < j; ++s) img = img * del_image;
        out = out + img;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Expression parser for domain elements: z, D, integer powers, * + - ( ).
// ---------------------------------------------------------------------------

namespace weyl_detail {

template <class K>
class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    DomainElement<K> parse() {
        DomainElement<K> e = parse_expr();
        skip_ws();
        if (pos_ != text_.size())
            throw SyntaxError("unexpected trailing input", pos_);
        return e;
    }

private:
    const std::string& text_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }
    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    DomainElement<K> parse_expr() {
        bool neg = false;
        skip_ws();
        if (eat('-')) neg = true;
        else eat('+');
        DomainElement<K> acc = parse_term();
        if (neg) acc = -acc;
        while (true) {
            skip_ws();
            if (eat('+')) acc = acc + parse_term();
            else if (eat('-')) acc = acc - parse_term();
            else break;
        }
        return acc;
    }

    DomainElement<K> parse_term() {
        DomainElement<K> acc = parse_factor();
        while (eat('*')) acc = acc * parse_factor();
        return acc;
    }

    long long parse_exponent() {
        bool paren = eat('(');
        skip_ws();
        bool neg = eat('-');
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        if (pos_ == start) throw SyntaxError("expected integer exponent", start);
        long long value = std::stoll(text_.substr(start, pos_ - start));
        if (paren && !eat(')')) throw SyntaxError("expected ')'", pos_);
        return neg ? -value : value;
    }

    DomainElement<K> parse_factor() {
        skip_ws();
        std::size_t start = pos_;
        if (eat('(')) {
            DomainElement<K> inner = parse_expr();
            if (!eat(')')) throw SyntaxError("expected ')'", pos_);
            return inner;
        }
        char c = peek();
        if (c == 'z' || c == 'D') {
            ++pos_;
            long long e = 1;
            if (eat('^')) e = parse_exponent();
            if (c == 'z') return DomainElement<K>::term(field_traits<K>::one(), e, 0);
            if (e < 0) throw SyntaxError("negative power of D", start);
            return DomainElement<K>::term(field_traits<K>::one(), 0, e);
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t numstart = pos_;
            while (pos_ < text_.size() &&
                   (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
                    text_[pos_] == '/' || text_[pos_] == '.'))
                ++pos_;
            K value;
            try {
                value = field_traits<K>::parse(text_.substr(numstart, pos_ - numstart));
            } catch (const ParseError&) {
                throw SyntaxError("invalid numeric literal", numstart);
            }
            return DomainElement<K>::constant(value);
        }
        throw SyntaxError("expected 'z', 'D', a number, or '('", pos_);
    }
};

template <class K>
std::string format_monomial(const char* a_name, const char* b_name, long long i, long long j,
                            const K& mag) {
    std::string body;
    auto append = [&body](const char* name, long long e) {
        if (e == 0) return;
        if (!body.empty()) body += "*";
        body += name;
        if (e != 1) body += "^(" + std::to_string(e) + ")";
    };
    append(a_name, i);
    append(b_name, j);
    std::string coef = field_traits<K>::format(mag);
    if (coef.find_first_of("+-", 1) != std::string::npos) coef = "(" + coef + ")";
    if (body.empty()) return coef;
    if (coef == "1") return body;
    return coef + "*" + body;
}

template <class K, class Element>
std::string format_terms(const Element& e, const char* a_name, const char* b_name) {
    using FT = field_traits<K>;
    if (e.terms.empty()) return "0";
    std::string out;
    for (auto it = e.terms.rbegin(); it != e.terms.rend(); ++it) {
        auto [i, j] = it->first;
        const K& c = it->second;
        bool neg = !FT::format(c).empty() && FT::format(c)[0] == '-';
        K mag = neg ? K(-c) : c;
        if (out.empty())
            out += neg ? "-" : "";
        else
            out += neg ? " - " : " + ";
        out += format_monomial(a_name, b_name, i, j, mag);
    }
    return out;
}

}  // namespace weyl_detail

template <class K = Rational>
DomainElement<K> parse_weyl(const std::string& text) {
    return weyl_detail::Parser<K>(text).parse();
}

// Terms print in descending (left-variable, right-variable) exponent order;
// eta prints as "n", Phi as "P".
template <class K>
std::string format_weyl(const TargetElement<K>& e) {
    return weyl_detail::format_terms<K>(e, "n", "P");
}

template <class K>
std::string format_weyl(const DomainElement<K>& e) {
    return weyl_detail::format_terms<K>(e, "z", "D");
}

}  // namespace mellin
