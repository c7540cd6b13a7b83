#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "mellin/errors.hpp"
#include "mellin/field.hpp"

namespace mellin {

enum class Var { Z, Zx, Zeta, Theta };

inline const char* var_name(Var v) {
    switch (v) {
        case Var::Z: return "z";
        case Var::Zx: return "zx";
        case Var::Zeta: return "zeta";
        case Var::Theta: return "theta";
    }
    return "?";
}

inline long long floor_div(long long a, long long b) {
    long long q = a / b, r = a % b;
    if (r != 0 && ((a < 0) != (b < 0))) --q;
    return q;
}
inline long long ceil_div(long long a, long long b) { return -floor_div(-a, b); }

// How many exponent units of output to produce when an operation on exact input
// has an infinite expansion (the result is still exact to the reported bound).
inline constexpr long long kDefaultWorkingUnits = 16;

// Truncated Puiseux series: sum over stored numerators k of c_k * var^(k/ram),
// exact modulo O(var^(trunc/ram)); absent trunc means the series is exact.
template <class K>
struct Series {
    Var var = Var::Z;
    long long ram = 1;
    std::map<long long, K> terms;
    std::optional<long long> trunc;

    using FT = field_traits<K>;

    Series() = default;
    explicit Series(Var v, long long q = 1, std::optional<long long> t = std::nullopt)
        : var(v), ram(q), trunc(t) {}

    static Series zero(Var v, long long q = 1, std::optional<long long> t = std::nullopt) {
        return Series(v, q, t);
    }
    static Series monomial(Var v, const K& c, long long k, long long q = 1) {
        Series s(v, q);
        s.add_term(k, c);
        return s;
    }
    static Series constant(Var v, const K& c) { return monomial(v, c, 0, 1); }
    static Series one(Var v) { return constant(v, FT::one()); }

    void add_term(long long k, const K& c) {
        if (trunc && k >= *trunc) return;
        auto it = terms.find(k);
        if (it == terms.end()) {
            if (!(c == FT::zero())) terms.emplace(k, c);
        } else {
            it->second = it->second + c;
            if (it->second == FT::zero()) terms.erase(it);
        }
    }

    bool is_zero() const { return terms.empty(); }
    bool is_exact() const { return !trunc.has_value(); }
    bool is_exact_monomial() const { return is_exact() && terms.size() == 1; }

    std::optional<long long> ord_num() const {
        if (terms.empty()) return std::nullopt;
        return terms.begin()->first;
    }
    Rational ord() const {
        if (terms.empty()) throw ZeroLeading("order of a zero series");
        return Rational(terms.begin()->first, ram);
    }
    std::pair<long long, K> leading() const {
        if (terms.empty()) throw ZeroLeading("zero series has no leading term");
        return *terms.begin();
    }

    // Coefficient of var^(num/den); zero if absent or off-lattice.
    K coefficient(long long num, long long den = 1) const {
        if ((num * ram) % den != 0) return FT::zero();
        auto it = terms.find(num * ram / den);
        return it == terms.end() ? FT::zero() : it->second;
    }

    Series with_ram(long long target) const {
        if (target == ram) return *this;
        if (target % ram != 0) throw RamMismatch("target ramification is not a multiple");
        long long f = target / ram;
        Series out(var, target);
        if (trunc) out.trunc = *trunc * f;
        for (auto& [k, c] : terms) out.terms.emplace(k * f, c);
        return out;
    }

    Series truncated(std::optional<long long> t) const {
        if (!t) return *this;
        Series out = *this;
        if (!out.trunc || *t < *out.trunc) out.trunc = *t;
        out.terms.erase(out.terms.lower_bound(*out.trunc), out.terms.end());
        return out;
    }
};

// Reduces the ramification to the sub-lattice actually used by the support.
// Drops coefficients the active field regards as zero.  Exact arithmetic never
// stores zeros, so this matters only in approximate mode, where cancellation
// leaves sub-tolerance residue that must not drive structural decisions such
// as leading exponents or lattice reduction.
template <class K>
Series<K> pruned(const Series<K>& a) {
    Series<K> out(a.var, a.ram, a.trunc);
    for (auto& [k, c] : a.terms)
        if (!field_traits<K>::is_zero(c)) out.terms.emplace(k, c);
    return out;
}

// Any truncation bound participates in the gcd, so the certified range is
// carried over exactly (never rounded, never overstated).
template <class K>
Series<K> normalize_ram(const Series<K>& in) {
    Series<K> a = pruned(in);
    long long g = a.ram;
    for (auto& [k, c] : a.terms) g = llgcd(g, k < 0 ? -k : k);
    if (a.trunc && *a.trunc != 0) g = llgcd(g, *a.trunc < 0 ? -*a.trunc : *a.trunc);
    if (g <= 1) return a;
    Series<K> out(a.var, a.ram / g);
    if (a.trunc) out.trunc = *a.trunc / g;
    for (auto& [k, c] : a.terms) out.terms.emplace(k / g, c);
    return out;
}

namespace detail {

inline std::optional<long long> opt_min(std::optional<long long> a, std::optional<long long> b) {
    if (!a) return b;
    if (!b) return a;
    return std::min(*a, *b);
}

template <class K>
void check_var(const Series<K>& a, const Series<K>& b) {
    if (a.var != b.var) throw VarMismatch("series in different variables");
}

template <class K>
std::pair<Series<K>, Series<K>> merge_ram(const Series<K>& a, const Series<K>& b) {
    long long L = lllcm(a.ram, b.ram);
    return {a.with_ram(L), b.with_ram(L)};
}

}  // namespace detail

template <class K>
Series<K> operator+(const Series<K>& x, const Series<K>& y) {
    detail::check_var(x, y);
    auto [a, b] = detail::merge_ram(x, y);
    Series<K> out(a.var, a.ram, detail::opt_min(a.trunc, b.trunc));
    for (auto& [k, c] : a.terms) out.add_term(k, c);
    for (auto& [k, c] : b.terms) out.add_term(k, c);
    return out;
}

template <class K>
Series<K> operator-(const Series<K>& a) {
    Series<K> out(a.var, a.ram, a.trunc);
    for (auto& [k, c] : a.terms) out.terms.emplace(k, -c);
    return out;
}

template <class K>
Series<K> operator-(const Series<K>& a, const Series<K>& b) {
    return a + (-b);
}

template <class K>
Series<K> scalar_mul(const K& c, const Series<K>& a) {
    Series<K> out(a.var, a.ram, a.trunc);
    if (c == field_traits<K>::zero()) return out;
    for (auto& [k, v] : a.terms) out.add_term(k, c * v);
    return out;
}

template <class K>
Series<K> operator*(const Series<K>& x, const Series<K>& y) {
    detail::check_var(x, y);
    auto [a, b] = detail::merge_ram(x, y);
    std::optional<long long> t;
    if (a.trunc && b.ord_num()) t = detail::opt_min(t, std::optional(*a.trunc + *b.ord_num()));
    if (b.trunc && a.ord_num()) t = detail::opt_min(t, std::optional(*b.trunc + *a.ord_num()));
    if (a.trunc && b.trunc && a.terms.empty() && b.terms.empty())
        t = detail::opt_min(t, std::optional(*a.trunc + *b.trunc));
    if (a.trunc && !b.trunc && b.terms.empty()) t = std::nullopt;  // times exact zero
    if (b.trunc && !a.trunc && a.terms.empty()) t = std::nullopt;
    Series<K> out(a.var, a.ram, t);
    for (auto& [ka, ca] : a.terms)
        for (auto& [kb, cb] : b.terms) out.add_term(ka + kb, ca * cb);
    return out;
}

// a * c*var^(k/ram_of_a) shorthand.
template <class K>
Series<K> shifted(const Series<K>& a, const K& c, long long k) {
    return a * Series<K>::monomial(a.var, c, k, a.ram);
}

template <class K>
Series<K> invert(const Series<K>& in, long long working_units = kDefaultWorkingUnits) {
    using FT = field_traits<K>;
    Series<K> a = pruned(in);
    if (a.terms.empty()) throw ZeroLeading("cannot invert a series with no known nonzero term");
    auto [k0, c0] = a.leading();
    K ci = FT::inverse(c0);
    if (a.is_exact_monomial()) return Series<K>::monomial(a.var, ci, -k0, a.ram);
    long long t_out = a.trunc ? *a.trunc - 2 * k0 : -k0 + working_units * a.ram;
    long long span = t_out + k0;  // required relative depth of (1+u)^(-1)
    Series<K> u = shifted(a, ci, -k0);
    u.add_term(0, -FT::one());
    // The constant of a/leading is 1 up to roundoff; prune so the subdominant
    // gap below is genuinely positive.
    u = pruned(u.truncated(span));
    Series<K> geom = Series<K>::one(a.var).with_ram(a.ram).truncated(span);
    if (!u.terms.empty()) {
        long long du = u.leading().first;
        Series<K> pw = geom;
        for (long long i = 1; i * du < span; ++i) {
            pw = (pw * (-u)).truncated(span);
            if (pw.terms.empty()) break;
            geom = geom + pw;
        }
    }
    return shifted(geom, ci, -k0).truncated(t_out);
}

template <class K>
Series<K> pow_int_series(const Series<K>& a, long long n,
                         long long working_units = kDefaultWorkingUnits) {
    if (n == 0) return Series<K>::one(a.var);
    Series<K> base = n < 0 ? invert(a, working_units) : a;
    long long m = n < 0 ? -n : n;
    Series<K> acc = Series<K>::one(base.var);
    Series<K> sq = base;
    while (m > 0) {
        if (m & 1) acc = acc * sq;
        m >>= 1;
        if (m > 0) sq = sq * sq;
    }
    return acc;
}

// a^(u/p) at the requested root branch; p >= 1.
template <class K>
Series<K> pow_rational(const Series<K>& in, long long u, long long p, long long branch = 0,
                       long long working_units = kDefaultWorkingUnits) {
    using FT = field_traits<K>;
    if (p <= 0) throw std::invalid_argument("pow_rational: denominator must be positive");
    Series<K> a = pruned(in);
    if (a.terms.empty())
        throw ZeroLeading("cannot take powers of a series with no known nonzero term");
    if (p == 1) return pow_int_series(a, u, working_units);
    auto [k0, c0] = a.leading();
    K lead = pow_int(FT::nth_root(c0, p, branch), u);
    if (a.is_exact_monomial())
        return normalize_ram(Series<K>::monomial(a.var, lead, k0 * u, a.ram * p));
    long long span = a.trunc ? *a.trunc - k0 : working_units * a.ram;
    Series<K> v = shifted(a, FT::inverse(c0), -k0);
    v.add_term(0, -FT::one());
    // The constant of a/leading is 1 up to roundoff; prune so the subdominant
    // gap below is genuinely positive.
    v = pruned(v.truncated(span));
    Rational e(u, p);
    Series<K> sum = Series<K>::one(a.var).with_ram(a.ram).truncated(span);
    if (!v.terms.empty()) {
        long long dv = v.leading().first;
        Series<K> pw = sum;
        Rational binom(1);
        for (long long i = 1; i * dv < span; ++i) {
            binom = binom * (e - (i - 1)) / i;
            pw = (pw * v).truncated(span);
            if (pw.terms.empty()) break;
            sum = sum + scalar_mul(FT::from_rational(binom), pw);
        }
    }
    return sum.with_ram(a.ram * p) * Series<K>::monomial(a.var, lead, k0 * u, a.ram * p);
}

template <class K>
Series<K> derivative(const Series<K>& a) {
    using FT = field_traits<K>;
    Series<K> out(a.var, a.ram);
    if (a.trunc) out.trunc = *a.trunc - a.ram;
    for (auto& [k, c] : a.terms) {
        if (k == 0) continue;
        out.add_term(k - a.ram, c * FT::from_rational(Rational(k, a.ram)));
    }
    return out;
}

namespace detail {

// Powers s^(k) for all k in [kmin, kmax] (k over the caller's ram lattice).
template <class K>
std::map<long long, Series<K>> power_table(const Series<K>& w, long long kmin, long long kmax,
                                           long long working_units) {
    std::map<long long, Series<K>> pows;
    pows.emplace(0, Series<K>::one(w.var));
    for (long long k = 1; k <= kmax; ++k) pows.emplace(k, pows.at(k - 1) * w);
    if (kmin < 0) {
        Series<K> inv = invert(w, working_units);
        pows.emplace(-1, inv);
        for (long long k = -2; k >= kmin; --k) pows.emplace(k, pows.at(k + 1) * inv);
    }
    return pows;
}

}  // namespace detail

// Composition a(s); fractional exponents of a use the branch root of s.
template <class K>
Series<K> substitute(const Series<K>& a, const Series<K>& s, long long branch = 0,
                     long long working_units = kDefaultWorkingUnits) {
    using FT = field_traits<K>;
    bool have_negative = !a.terms.empty() && a.terms.begin()->first < 0;
    if (s.terms.empty()) {
        if (have_negative) throw ZeroLeading("cannot invert the zero inner series");
        Series<K> out = Series<K>::constant(s.var, a.coefficient(0));
        if (s.trunc) {
            std::optional<Rational> bound;
            for (auto& [k, c] : a.terms)
                if (k > 0) {
                    Rational b = Rational(k, a.ram) * Rational(*s.trunc, s.ram);
                    if (!bound || b < *bound) bound = b;
                }
            if (a.trunc) {
                Rational b = Rational(*a.trunc, a.ram) * Rational(*s.trunc, s.ram);
                if (!bound || b < *bound) bound = b;
            }
            if (bound) out = out.truncated(static_cast<long long>(rational_floor(*bound)));
        } else if (a.trunc && *a.trunc <= 0) {
            out = out.truncated(0);
        }
        return out;
    }
    if (a.trunc && *s.ord_num() <= 0)
        throw DivergentComposition("composition tail does not converge: inner order <= 0");
    Series<K> w = a.ram == 1 ? s : pow_rational(s, 1, a.ram, branch, working_units);
    long long kmin = a.terms.empty() ? 0 : a.terms.begin()->first;
    long long kmax = a.terms.empty() ? 0 : a.terms.rbegin()->first;
    auto pows = detail::power_table(w, std::min(kmin, 0LL), std::max(kmax, 0LL), working_units);
    Series<K> result = Series<K>::zero(s.var);
    for (auto& [k, c] : a.terms) result = result + scalar_mul(c, pows.at(k));
    if (a.trunc) {
        Rational tail = Rational(*a.trunc, a.ram) * s.ord();
        long long R = result.ram;
        result = result.truncated(static_cast<long long>(rational_floor(tail * R)));
    }
    return result;
}

// Solves s(h(t)) = t for h in the target variable; ord(s) must be nonzero.
// Internally the problem is rewritten over the integral lattices u = z^(1/q)
// and tau = t^(1/k0): the inner Newton iteration then composes only integer
// powers, so the one root extraction (the k0-th root of 1/c0 selecting the
// branch of h) is the sole branch decision and stays globally consistent.
template <class K>
Series<K> revert(const Series<K>& input, Var target, long long branch = 0,
                 long long working_units = kDefaultWorkingUnits) {
    using FT = field_traits<K>;
    Series<K> s = pruned(input);
    if (s.terms.empty()) throw ZeroLeading("cannot revert a series with no known nonzero term");
    auto [k0, c0] = s.leading();
    if (k0 == 0) throw ZeroOrder("cannot revert a series of order zero");
    long long q = s.ram;
    if (k0 < 0) {
        if (s.is_exact_monomial()) {
            K lead = pow_int(FT::nth_root(c0, -k0, branch), q);
            return normalize_ram(Series<K>::monomial(target, lead, -q, -k0));
        }
        throw DivergentComposition(
            "compositional inverse with descending exponents is only supported for monomials");
    }
    K mu = FT::nth_root(FT::inverse(c0), k0, branch);   // leading coefficient of u(tau)
    Series<K> U = Series<K>::monomial(target, mu, 1, k0);  // u = mu*tau + ...
    if (s.is_exact_monomial()) return normalize_ram(pow_int_series(U, q));
    Series<K> S(s.var, 1, s.trunc);  // s reinterpreted as an integral series in u
    S.terms = s.terms;
    // Newton iteration U <- U - (S(U) - t)/S'(U); the certified agreement
    // order doubles each round.
    long long t_cap = s.trunc ? *s.trunc - k0 + q : q + working_units * k0;
    Series<K> Sprime = derivative(S);
    Series<K> t_mono = Series<K>::monomial(target, FT::one(), k0, k0);
    long long wu = ceil_div(t_cap, k0) + 2;
    long long last_agree = std::numeric_limits<long long>::min() / 2;
    for (int iter = 0; iter < 64; ++iter) {
        // Certified agreement order of the candidate, in numerators over k0
        // (always rounded down so the certificate is never overstated).
        Series<K> residual = pruned(substitute(S, U, branch, wu) - t_mono);
        long long agree;
        if (residual.terms.empty())
            agree = residual.trunc ? floor_div(*residual.trunc * k0, residual.ram)
                                   : t_cap + k0;
        else
            agree = floor_div(residual.leading().first * k0, residual.ram);
        if (agree >= t_cap + k0 - q) {
            Series<K> Ucut = U.truncated(std::min(t_cap, agree - (k0 - q)));
            return normalize_ram(pow_int_series(Ucut, q));
        }
        if (agree <= last_agree)
            throw DivergentComposition("reversion iteration stopped improving");
        last_agree = agree;
        Series<K> slope = substitute(Sprime, U, branch, wu);
        Series<K> next = U - residual * invert(slope, wu);
        next = normalize_ram(next);
        long long L = lllcm(next.ram, k0);
        U = next.with_ram(L).truncated(t_cap * (L / k0));
    }
    throw DivergentComposition("reversion did not converge");
}

// The substitution automorphism: theta^(1/q) -> theta^(1/q)*(1+theta)^(-1/q)
// (forward); the inverse direction uses (1-theta)^(-1/q).
template <class K>
Series<K> phi_substitute(const Series<K>& a, bool forward = true,
                         long long working_units = kDefaultWorkingUnits) {
    using FT = field_traits<K>;
    if (a.terms.empty()) return a;
    long long q = a.ram;
    long long kmin = a.terms.begin()->first;
    long long kmax = a.terms.rbegin()->first;
    long long wu = working_units;
    if (a.trunc) wu = std::max<long long>(2, ceil_div(*a.trunc - std::min(kmin, 0LL), q) + 2);
    Series<K> base = Series<K>::one(a.var) +
                     Series<K>::monomial(a.var, forward ? FT::one() : -FT::one(), 1, 1);
    Series<K> w = pow_rational(base, -1, q, 0, wu);
    auto pows = detail::power_table(w, std::min(kmin, 0LL), std::max(kmax, 0LL), wu * q);
    Series<K> out = Series<K>::zero(a.var, a.ram);
    for (auto& [k, c] : a.terms)
        out = out + scalar_mul(c, pows.at(k)) * Series<K>::monomial(a.var, FT::one(), k, a.ram);
    if (a.trunc) {
        long long f = out.ram / a.ram;
        out = out.truncated(*a.trunc * f);
    }
    return out;
}

// Structural equality (same lattice, same certified bound, equal coefficients).
template <class K>
bool series_equal(const Series<K>& x, const Series<K>& y) {
    if (x.var != y.var) return false;
    auto [a, b] = detail::merge_ram(x, y);
    if (a.trunc != b.trunc) return false;
    if (a.terms.size() != b.terms.size()) return false;
    auto ia = a.terms.begin();
    auto ib = b.terms.begin();
    for (; ia != a.terms.end(); ++ia, ++ib) {
        if (ia->first != ib->first) return false;
        if (!field_traits<K>::equal(ia->second, ib->second)) return false;
    }
    return true;
}

// Coefficient-wise agreement on the overlap certified by both bounds.
template <class K>
bool series_agree(const Series<K>& x, const Series<K>& y) {
    if (x.var != y.var) return false;
    auto [a, b] = detail::merge_ram(x, y);
    std::optional<long long> t = detail::opt_min(a.trunc, b.trunc);
    auto within = [&](long long k) { return !t || k < *t; };
    for (auto& [k, c] : a.terms) {
        if (!within(k)) continue;
        auto it = b.terms.find(k);
        K other = it == b.terms.end() ? field_traits<K>::zero() : it->second;
        if (!field_traits<K>::equal(c, other)) return false;
    }
    for (auto& [k, c] : b.terms) {
        if (!within(k)) continue;
        if (a.terms.find(k) == a.terms.end() && !field_traits<K>::is_zero(c)) return false;
    }
    return true;
}

}  // namespace mellin
