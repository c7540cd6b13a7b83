#include <doctest.h>

#include "mellin/series.hpp"
#include "test_support.hpp"

using namespace mellin;

namespace {

using QSeries = Series<Rational>;

QSeries make(Var v, long long q, std::initializer_list<std::pair<long long, Rational>> ts,
             std::optional<long long> trunc = std::nullopt) {
    QSeries s(v, q, trunc);
    for (auto& [k, c] : ts) s.add_term(k, c);
    return s;
}

}  // namespace

TEST_SUITE("series") {

    TEST_CASE("construction, order, lattice merge") {
        QSeries s = QSeries::monomial(Var::Z, Rational(3, 2), -1, 2);
        CHECK(s.ord() == Rational(-1, 2));
        QSeries z = QSeries::monomial(Var::Z, Rational(1), 1);
        QSeries sum = s + z;
        CHECK(sum.ram == 2);
        CHECK(sum.coefficient(-1, 2) == Rational(3, 2));
        CHECK(sum.coefficient(1) == Rational(1));
        CHECK(sum.coefficient(1, 2) == Rational(0));
        CHECK(sum.is_exact());
        CHECK(sum.ord() == Rational(-1, 2));

        QSeries w = QSeries::monomial(Var::Theta, Rational(1), 1);
        CHECK_THROWS_AS(sum + w, VarMismatch);
        CHECK_THROWS_AS(QSeries::zero(Var::Z).ord(), ZeroLeading);
    }

    TEST_CASE("cancellation removes stored terms") {
        QSeries a = make(Var::Z, 1, {{0, 1}, {2, 5}});
        QSeries b = make(Var::Z, 1, {{2, -5}, {3, 1}});
        QSeries sum = a + b;
        CHECK(sum.terms.size() == 2);
        CHECK(sum.coefficient(2) == Rational(0));
        CHECK(sum.coefficient(3) == Rational(1));
        CHECK((a - a).is_zero());
    }

    TEST_CASE("addition propagates the weaker bound") {
        QSeries a = QSeries::one(Var::Z).truncated(2);
        QSeries b = QSeries::monomial(Var::Z, Rational(1), 1).truncated(3);
        QSeries sum = a + b;
        REQUIRE(sum.trunc.has_value());
        CHECK(*sum.trunc == 2);
        CHECK(sum.terms.size() == 2);
    }

    TEST_CASE("multiplication shifts bounds by the other order") {
        QSeries a = make(Var::Z, 1, {{-1, 1}, {0, 1}}, 2);
        QSeries prod = a * QSeries::monomial(Var::Z, Rational(1), 1);
        REQUIRE(prod.trunc.has_value());
        CHECK(*prod.trunc == 3);
        CHECK(prod.coefficient(0) == Rational(1));
        CHECK(prod.coefficient(1) == Rational(1));

        // Truncated times exact zero is exactly zero.
        QSeries ez = QSeries::zero(Var::Z);
        CHECK((a * ez).is_zero());
        CHECK((a * ez).is_exact());

        // Truncated zero absorbs: O(z^2) * z^3 = O(z^5).
        QSeries tz = QSeries::zero(Var::Z, 1, 2);
        QSeries shiftd = tz * QSeries::monomial(Var::Z, Rational(1), 3);
        CHECK(shiftd.is_zero());
        REQUIRE(shiftd.trunc.has_value());
        CHECK(*shiftd.trunc == 5);
    }

    TEST_CASE("derivative") {
        QSeries a = make(Var::Z, 1, {{-1, 1}}, 2);
        QSeries d = derivative(a);
        CHECK(d.coefficient(-2) == Rational(-1));
        REQUIRE(d.trunc.has_value());
        CHECK(*d.trunc == 1);

        QSeries half = QSeries::monomial(Var::Theta, Rational(1), 1, 2);
        QSeries dh = derivative(half);
        CHECK(dh.coefficient(-1, 2) == Rational(1, 2));

        CHECK(derivative(QSeries::one(Var::Z)).is_zero());
    }

    TEST_CASE("normalize_ram reduces to the used sub-lattice") {
        QSeries a = make(Var::Z, 4, {{2, 1}, {6, 2}});
        QSeries n = normalize_ram(a);
        CHECK(n.ram == 2);
        CHECK(n.coefficient(1, 2) == Rational(1));
        CHECK(n.coefficient(3, 2) == Rational(2));

        // A bound off the candidate sub-lattice blocks the reduction, so the
        // certified range is never weakened or overstated.
        QSeries b = make(Var::Z, 4, {{4, 1}}, 7);
        QSeries nb = normalize_ram(b);
        CHECK(nb.ram == 4);
        REQUIRE(nb.trunc.has_value());
        CHECK(*nb.trunc == 7);

        QSeries c = make(Var::Z, 4, {{4, 1}}, 8);
        QSeries nc = normalize_ram(c);
        CHECK(nc.ram == 1);
        CHECK(nc.coefficient(1) == Rational(1));
        CHECK(*nc.trunc == 2);
    }

    TEST_CASE("inversion of exact monomials is exact") {
        QSeries m = QSeries::monomial(Var::Z, Rational(-1), -1);
        QSeries inv = invert(m);
        CHECK(inv.is_exact());
        CHECK(inv.coefficient(1) == Rational(-1));
        CHECK(inv.terms.size() == 1);
    }

    TEST_CASE("inversion expands geometric tails") {
        QSeries a = make(Var::Z, 1, {{-2, 1}, {-1, 1}});
        QSeries inv = invert(a);
        CHECK(inv.coefficient(2) == Rational(1));
        CHECK(inv.coefficient(3) == Rational(-1));
        CHECK(inv.coefficient(4) == Rational(1));
        CHECK(inv.coefficient(5) == Rational(-1));
        REQUIRE(inv.trunc.has_value());
        CHECK(*inv.trunc == 18);
        CHECK(series_agree(a * inv, QSeries::one(Var::Z)));

        QSeries t = make(Var::Z, 1, {{1, 2}, {2, 1}}, 4);
        QSeries ti = invert(t);
        REQUIRE(ti.trunc.has_value());
        CHECK(*ti.trunc == 2);
        CHECK(ti.coefficient(-1) == Rational(1, 2));
        CHECK(ti.coefficient(0) == Rational(-1, 4));
        CHECK(ti.coefficient(1) == Rational(1, 8));
        CHECK_THROWS_AS(invert(QSeries::zero(Var::Z)), ZeroLeading);
    }

    TEST_CASE("inversion residuals on random units") {
        std::mt19937_64 g(202);
        for (int trial = 0; trial < 60; ++trial) {
            long long q = testing::rand_int(g, 1, 3);
            long long k0 = testing::rand_int(g, -4, 4);
            QSeries u = testing::rand_unit(g, Var::Z, q, k0, 3, true);
            QSeries inv = invert(u);
            CHECK(series_agree(u * inv, QSeries::one(Var::Z)));
            CHECK(series_agree(inv * u, QSeries::one(Var::Z)));
        }
    }

    TEST_CASE("integer powers") {
        QSeries a = make(Var::Z, 1, {{0, 1}, {1, 1}});
        QSeries cube = pow_int_series(a, 3);
        CHECK(cube.coefficient(0) == Rational(1));
        CHECK(cube.coefficient(1) == Rational(3));
        CHECK(cube.coefficient(2) == Rational(3));
        CHECK(cube.coefficient(3) == Rational(1));
        CHECK(pow_int_series(a, 0).coefficient(0) == Rational(1));
        QSeries im = pow_int_series(QSeries::monomial(Var::Z, Rational(2), 3), -2);
        CHECK(im.coefficient(-6) == Rational(1, 4));
    }

    TEST_CASE("rational powers of monomials are exact") {
        QSeries z2 = QSeries::monomial(Var::Z, Rational(1), 2);
        QSeries r = pow_rational(z2, 1, 2);
        CHECK(r.is_exact());
        CHECK(r.ram == 1);
        CHECK(r.coefficient(1) == Rational(1));

        QSeries m = pow_rational(QSeries::monomial(Var::Z, Rational(4), 2), 1, 2);
        CHECK(m.coefficient(1) == Rational(2));

        QSeries b = pow_rational(z2, 1, 2, 1);
        CHECK(b.coefficient(1) == Rational(-1));

        QSeries frac = pow_rational(QSeries::monomial(Var::Z, Rational(1), 1), 3, 2);
        CHECK(frac.ram == 2);
        CHECK(frac.coefficient(3, 2) == Rational(1));

        CHECK_THROWS_AS(pow_rational(QSeries::monomial(Var::Z, Rational(2), 0), 1, 2),
                        NoExactRoot);
    }

    TEST_CASE("binomial expansion of rational powers") {
        QSeries base = make(Var::Z, 1, {{0, 1}, {1, 1}});
        QSeries r = pow_rational(base, -1, 2);
        CHECK(r.coefficient(0) == Rational(1));
        CHECK(r.coefficient(1) == Rational(-1, 2));
        CHECK(r.coefficient(2) == Rational(3, 8));
        CHECK(r.coefficient(3) == Rational(-5, 16));

        QSeries sq = make(Var::Z, 1, {{2, 4}, {3, 1}, {4, 1}});
        QSeries root = pow_rational(sq, 1, 2);
        CHECK(series_agree(root * root, sq));

        QSeries again = pow_rational(root, 2, 1);
        CHECK(series_agree(again, sq));
    }

    TEST_CASE("substitution matches direct expansion") {
        QSeries a = invert(QSeries::one(Var::Z) + QSeries::monomial(Var::Z, Rational(1), 1));
        QSeries s = make(Var::Theta, 1, {{1, 1}, {2, 1}});
        QSeries c = substitute(a, s);
        CHECK(c.var == Var::Theta);
        CHECK(c.coefficient(0) == Rational(1));
        CHECK(c.coefficient(1) == Rational(-1));
        CHECK(c.coefficient(2) == Rational(0));
        CHECK(c.coefficient(3) == Rational(1));

        // Negative exponents compose through inversion of the inner series.
        QSeries zinv = QSeries::monomial(Var::Z, Rational(1), -1);
        QSeries ci = substitute(zinv, s);
        CHECK(ci.coefficient(-1) == Rational(1));
        CHECK(ci.coefficient(0) == Rational(-1));
        CHECK(ci.coefficient(1) == Rational(1));

        // Fractional exponents use a root of the inner series.
        QSeries half = QSeries::monomial(Var::Z, Rational(1), 1, 2);
        QSeries s4 = make(Var::Theta, 1, {{2, 4}});
        QSeries ch = substitute(half, s4);
        CHECK(ch.coefficient(1) == Rational(2));
    }

    TEST_CASE("substitution guards") {
        QSeries truncated_outer = QSeries::one(Var::Z).truncated(3);
        QSeries unit_inner = QSeries::one(Var::Theta) + QSeries::monomial(Var::Theta, Rational(1), 1);
        CHECK_THROWS_AS(substitute(truncated_outer, unit_inner), DivergentComposition);

        QSeries neg = QSeries::monomial(Var::Z, Rational(1), -1);
        CHECK_THROWS_AS(substitute(neg, QSeries::zero(Var::Theta)), ZeroLeading);

        // Zero inner series keeps only the constant term.
        QSeries poly = make(Var::Z, 1, {{0, 2}, {1, 3}});
        QSeries at_zero = substitute(poly, QSeries::zero(Var::Theta));
        CHECK(at_zero.var == Var::Theta);
        CHECK(at_zero.is_exact());
        CHECK(at_zero.coefficient(0) == Rational(2));

        QSeries at_trunc_zero = substitute(poly, QSeries::zero(Var::Theta, 1, 2));
        REQUIRE(at_trunc_zero.trunc.has_value());
        CHECK(*at_trunc_zero.trunc == 2);
    }

    TEST_CASE("substitution is a ring homomorphism") {
        std::mt19937_64 g(303);
        for (int trial = 0; trial < 30; ++trial) {
            QSeries a = testing::rand_series(g, Var::Z, 1, 0, 4, 3);
            QSeries b = testing::rand_series(g, Var::Z, 1, 0, 4, 3);
            QSeries s = testing::rand_unit(g, Var::Theta, 1, 1, 2);
            QSeries lhs = substitute(a * b, s);
            QSeries rhs = substitute(a, s) * substitute(b, s);
            CHECK(series_agree(lhs, rhs));
            CHECK(series_agree(substitute(a + b, s), substitute(a, s) + substitute(b, s)));
        }
    }

    TEST_CASE("reversion of monomials") {
        QSeries h = revert(QSeries::monomial(Var::Z, Rational(1), 2), Var::Theta);
        CHECK(h.var == Var::Theta);
        CHECK(h.is_exact());
        CHECK(h.ram == 2);
        CHECK(h.coefficient(1, 2) == Rational(1));

        QSeries h4 = revert(QSeries::monomial(Var::Z, Rational(4), 2), Var::Theta);
        CHECK(h4.coefficient(1, 2) == Rational(1, 2));

        QSeries hb = revert(QSeries::monomial(Var::Z, Rational(1), 2), Var::Theta, 1);
        CHECK(hb.coefficient(1, 2) == Rational(-1));

        QSeries hneg = revert(QSeries::monomial(Var::Z, Rational(1), -1), Var::Theta);
        CHECK(hneg.is_exact());
        CHECK(hneg.coefficient(-1) == Rational(1));

        QSeries hneg2 = revert(QSeries::monomial(Var::Z, Rational(4), -2), Var::Theta);
        CHECK(hneg2.ram == 2);
        CHECK(hneg2.coefficient(-1, 2) == Rational(2));
    }

    TEST_CASE("reversion of series") {
        QSeries s = make(Var::Z, 1, {{2, 1}, {3, 1}});
        QSeries h = revert(s, Var::Theta);
        CHECK(h.coefficient(1, 2) == Rational(1));
        CHECK(h.coefficient(1) == Rational(-1, 2));
        CHECK(h.coefficient(3, 2) == Rational(5, 8));
        QSeries t = QSeries::monomial(Var::Theta, Rational(1), 1);
        CHECK(series_agree(substitute(s, h), t));

        QSeries st = make(Var::Z, 1, {{2, 1}, {3, 1}}, 5);
        QSeries ht = revert(st, Var::Theta);
        REQUIRE(ht.trunc.has_value());
        CHECK(Rational(*ht.trunc, ht.ram) == Rational(2));
        CHECK(ht.coefficient(1, 2) == Rational(1));
        CHECK(ht.coefficient(1) == Rational(-1, 2));
        CHECK(ht.coefficient(3, 2) == Rational(5, 8));
    }

    TEST_CASE("reversion guards") {
        CHECK_THROWS_AS(revert(QSeries::zero(Var::Z), Var::Theta), ZeroLeading);
        CHECK_THROWS_AS(revert(QSeries::one(Var::Z), Var::Theta), ZeroOrder);
        QSeries down = make(Var::Z, 1, {{-1, 1}, {0, 1}});
        CHECK_THROWS_AS(revert(down, Var::Theta), DivergentComposition);
    }

    TEST_CASE("reversion roundtrips on random series") {
        std::mt19937_64 g(404);
        QSeries t = QSeries::monomial(Var::Theta, Rational(1), 1);
        for (int trial = 0; trial < 20; ++trial) {
            long long k0 = testing::rand_int(g, 1, 3);
            Rational rho = abs(testing::rand_nonzero_rational(g, 4));
            QSeries s = QSeries::monomial(Var::Z, pow_int(rho, k0), k0);
            long long n = testing::rand_int(g, 0, 3);
            for (long long i = 1; i <= n; ++i) s.add_term(k0 + i, testing::rand_rational(g, 4));
            QSeries h = revert(s, Var::Theta, 0, 8);
            CHECK(series_agree(substitute(s, h), t));
        }
    }

    TEST_CASE("lattice substitution automorphism") {
        QSeries th = QSeries::monomial(Var::Theta, Rational(1), 1);
        QSeries f = phi_substitute(th);
        CHECK(f.coefficient(1) == Rational(1));
        CHECK(f.coefficient(2) == Rational(-1));
        CHECK(f.coefficient(3) == Rational(1));

        QSeries half = QSeries::monomial(Var::Theta, Rational(1), 1, 2);
        QSeries fh = phi_substitute(half);
        CHECK(fh.coefficient(1, 2) == Rational(1));
        CHECK(fh.coefficient(3, 2) == Rational(-1, 2));
        CHECK(fh.coefficient(5, 2) == Rational(3, 8));

        QSeries inv = QSeries::monomial(Var::Theta, Rational(1), -1);
        QSeries fi = phi_substitute(inv);
        QSeries expected = inv + QSeries::one(Var::Theta);
        CHECK(series_agree(fi, expected));
    }

    TEST_CASE("lattice substitution roundtrip and multiplicativity") {
        std::mt19937_64 g(505);
        for (int trial = 0; trial < 25; ++trial) {
            long long q = testing::rand_int(g, 1, 3);
            QSeries a = testing::rand_series(g, Var::Theta, q, -2 * q, 3 * q, 4, true);
            QSeries back = phi_substitute(phi_substitute(a, true), false);
            CHECK(series_agree(back, a));
            QSeries b = testing::rand_series(g, Var::Theta, q, 0, 3 * q, 3);
            CHECK(series_agree(phi_substitute(a * b), phi_substitute(a) * phi_substitute(b)));
            CHECK(series_agree(phi_substitute(a + b), phi_substitute(a) + phi_substitute(b)));
        }
    }

    TEST_CASE("ring axioms on random series") {
        std::mt19937_64 g(606);
        QSeries one = QSeries::one(Var::Z);
        for (int trial = 0; trial < 60; ++trial) {
            long long q = testing::rand_int(g, 1, 4);
            QSeries a = testing::rand_series(g, Var::Z, q, -5, 8, 4, true);
            QSeries b = testing::rand_series(g, Var::Z, q, -5, 8, 4, true);
            QSeries c = testing::rand_series(g, Var::Z, q, -5, 8, 4, true);
            CHECK(series_agree(a + b, b + a));
            CHECK(series_agree((a + b) + c, a + (b + c)));
            CHECK(series_agree(a * b, b * a));
            CHECK(series_agree((a * b) * c, a * (b * c)));
            CHECK(series_agree(a * (b + c), a * b + a * c));
            CHECK(series_agree(a * one, a));
            CHECK(series_agree(a - a, QSeries::zero(Var::Z)));
        }
    }

    TEST_CASE("equality and agreement semantics") {
        QSeries a = make(Var::Z, 1, {{0, 1}, {1, 2}});
        QSeries b = make(Var::Z, 2, {{0, 1}, {2, 2}});
        CHECK(series_equal(a, b));
        CHECK(series_agree(a, b));

        QSeries c = a.truncated(5);
        CHECK_FALSE(series_equal(a, c));
        CHECK(series_agree(a, c));

        QSeries d = make(Var::Z, 1, {{0, 1}, {1, 2}, {7, 3}});
        CHECK(series_agree(c, d));       // 7 is beyond the shared bound
        CHECK_FALSE(series_agree(a, d));  // exact series must match everywhere
    }
}
