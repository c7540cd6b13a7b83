#pragma once

#include <random>

#include "mellin/field.hpp"
#include "mellin/series.hpp"

namespace mellin::testing {

// Saves the active field configuration and restores it on scope exit.
struct FieldConfigGuard {
    FieldConfig saved;
    explicit FieldConfigGuard(const FieldConfig& cfg) : saved(current_config()) { cfg.activate(); }
    ~FieldConfigGuard() { saved.activate(); }
    FieldConfigGuard(const FieldConfigGuard&) = delete;
    FieldConfigGuard& operator=(const FieldConfigGuard&) = delete;
};

inline FieldConfig approx_config() { return FieldConfig{FieldMode::Approx, 192, 1e-20}; }

inline long long rand_int(std::mt19937_64& g, long long lo, long long hi) {
    return std::uniform_int_distribution<long long>(lo, hi)(g);
}

inline Rational rand_rational(std::mt19937_64& g, long long max_abs = 9) {
    return Rational(rand_int(g, -max_abs, max_abs), rand_int(g, 1, max_abs));
}

inline Rational rand_nonzero_rational(std::mt19937_64& g, long long max_abs = 9) {
    while (true) {
        Rational r = rand_rational(g, max_abs);
        if (r != 0) return r;
    }
}

template <class K>
K rand_scalar(std::mt19937_64& g) {
    if constexpr (field_traits<K>::exact) {
        return rand_rational(g);
    } else {
        return K{to_real(rand_rational(g)), to_real(rand_rational(g))};
    }
}

// Random series with the given lattice and support window; optionally truncated.
template <class K = Rational>
Series<K> rand_series(std::mt19937_64& g, Var v, long long q, long long kmin, long long kmax,
                      int max_terms, bool allow_trunc = false) {
    Series<K> s(v, q);
    long long n = rand_int(g, 0, max_terms);
    for (long long i = 0; i < n; ++i) s.add_term(rand_int(g, kmin, kmax), rand_scalar<K>(g));
    if (allow_trunc && rand_int(g, 0, 1) == 1) s = s.truncated(rand_int(g, kmax - 1, kmax + 4));
    return s;
}

// Random series with an invertible (nonzero) leading term at a chosen exponent.
template <class K = Rational>
Series<K> rand_unit(std::mt19937_64& g, Var v, long long q, long long k0, int extra_terms,
                    bool allow_trunc = false) {
    Series<K> s = rand_series<K>(g, v, q, k0 + 1, k0 + 6, extra_terms, allow_trunc);
    s.terms.erase(s.terms.begin(), s.terms.upper_bound(k0));
    K lead;
    if constexpr (field_traits<K>::exact) {
        lead = rand_nonzero_rational(g);
    } else {
        lead = field_traits<K>::from_rational(rand_nonzero_rational(g));
    }
    s.terms[k0] = lead;
    return s;
}

}  // namespace mellin::testing
