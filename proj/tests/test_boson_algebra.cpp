#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "squeezelab/boson_algebra.hpp"
#include "squeezelab/fock.hpp"

using namespace squeezelab;
using P = NormalOrderedPoly;

TEST(Poly, NoZeroCoefficientsStored) {
    P p = P::monomial(2, 1, 3);
    p.add_term({2, 1}, -3);
    EXPECT_TRUE(p.is_zero());
    EXPECT_TRUE((P::number() - P::number()).is_zero());
    EXPECT_TRUE(P::monomial(1, 1, 0).is_zero());
}

TEST(Multiply, CanonicalCommutation) {
    EXPECT_EQ(multiply(P::annihilation(), P::creation()), P::number() + P::constant(1));
}

TEST(Multiply, TwoPhotonReordering) {
    P expected = P::monomial(2, 2) + P::monomial(1, 1, 4) + P::constant(2);
    EXPECT_EQ(multiply(P::annihilation(2), P::creation(2)), expected);
}

TEST(Multiply, IdentityIsNeutral) {
    const P p = P::monomial(3, 1, mpq_class(2, 7)) + P::monomial(0, 4, -1) + P::constant(5);
    EXPECT_EQ(multiply(P::constant(1), p), p);
    EXPECT_EQ(multiply(p, P::constant(1)), p);
}

TEST(Multiply, Associative) {
    std::mt19937 rng(20251016);
    std::uniform_int_distribution<unsigned> power(0, 3);
    std::uniform_int_distribution<int> num(-5, 5);
    std::uniform_int_distribution<int> den(1, 4);
    auto random_poly = [&] {
        P p;
        for (int t = 0; t < 3; ++t) p.add_term({power(rng), power(rng)}, mpq_class(num(rng), den(rng)));
        return p;
    };
    for (int trial = 0; trial < 60; ++trial) {
        const P a = random_poly();
        const P b = random_poly();
        const P c = random_poly();
        EXPECT_EQ(multiply(multiply(a, b), c), multiply(a, multiply(b, c))) << trial;
    }
}

TEST(Multiply, MatchesTruncatedMatrices) {
    // products of low-degree monomials checked on levels far below the cutoff
    const FockDim dim(30);
    auto matrix_of = [&](unsigned p, unsigned q) { return (creation_power(dim, p) * annihilation_power(dim, q)).to_dense(); };
    for (unsigned p = 0; p <= 2; ++p) {
        for (unsigned q = 0; q <= 2; ++q) {
            for (unsigned p2 = 0; p2 <= 2; ++p2) {
                for (unsigned q2 = 0; q2 <= 2; ++q2) {
                    const P prod = multiply(P::monomial(p, q), P::monomial(p2, q2));
                    const Eigen::MatrixXd ref = matrix_of(p, q) * matrix_of(p2, q2);
                    for (std::size_t i = 0; i < 20; ++i) {
                        for (std::size_t j = 0; j < 20; ++j) {
                            EXPECT_NEAR(prod.matrix_element(i, j), ref(i, j), 1e-9 * std::max(1.0, std::abs(ref(i, j))));
                        }
                    }
                }
            }
        }
    }
}

TEST(Commutator, Examples) {
    EXPECT_EQ(commutator(P::annihilation(), P::creation()), P::constant(1));
    EXPECT_EQ(commutator(P::number(), P::creation(3)), P::monomial(3, 0, 3));
    const P a3 = commutator(P::annihilation(3), P::creation(3));
    EXPECT_TRUE(a3.is_number_conserving());
    for (unsigned m = 0; m <= 20; ++m) {
        EXPECT_EQ(a3.diagonal_element(m), mpq_class(9 * m * m + 9 * m + 6)) << m;
    }
    // 9(a+a)^2 + 9 a+a + 6 = 9 a+^2 a^2 + 18 a+a + 6
    EXPECT_EQ(a3, P::monomial(2, 2, 9) + P::monomial(1, 1, 18) + P::constant(6));
}

TEST(NestedCommutator, LowOrders) {
    EXPECT_EQ(nested_commutator(3, 0), P::number());
    EXPECT_EQ(nested_commutator(3, 1), mpq_class(-3) * P::creation(3) + mpq_class(-3) * P::annihilation(3));
    for (unsigned n = 1; n <= 5; ++n) {
        const P second = nested_commutator(n, 2);
        const P a_n = commutator(P::annihilation(n), P::creation(n));
        EXPECT_EQ(second, mpq_class(2 * n) * a_n) << n;
        for (unsigned m = 0; m <= 10; ++m) {
            EXPECT_EQ(second.diagonal_element(m), mpq_class(2 * n) * mpq_class(commutator_sum_formula(n, m)));
        }
    }
}

TEST(NestedCommutator, DegreeGrowth) {
    for (unsigned m = 1; m <= 8; ++m) EXPECT_EQ(nested_commutator(3, m).degree(), 2 + m) << m;
    for (unsigned m = 1; m <= 6; ++m) EXPECT_EQ(nested_commutator(4, m).degree(), 2 + 2 * m) << m;
}

TEST(NestedCommutator, BudgetNamesParameter) {
    try {
        nested_commutator(4, 12, AlgebraBudget{10, 500000});
        FAIL() << "expected ResourceError";
    } catch (const ResourceError& e) {
        EXPECT_EQ(e.parameter(), "max_degree");
    }
    try {
        nested_commutator(4, 12, AlgebraBudget{2000, 20});
        FAIL() << "expected ResourceError";
    } catch (const ResourceError& e) {
        EXPECT_EQ(e.parameter(), "max_terms");
    }
    EXPECT_THROW(coefficients(3, 30, AlgebraBudget{20, 500000}), ResourceError);
}

// Nested commutators built from truncated matrices, compared on the block
// that no intermediate product can push past the cutoff.
TEST(NestedCommutator, MatchesMatrixImage) {
    for (unsigned n = 1; n <= 4; ++n) {
        for (unsigned m = 0; m <= 4; ++m) {
            const P sym = nested_commutator(n, m);
            const std::size_t safe = sym.degree() + 4;
            const FockDim dim(safe + m * n + 1);
            const Eigen::MatrixXd a = (creation_power(dim, n) - annihilation_power(dim, n)).to_dense();
            Eigen::MatrixXd b = number_operator(dim).to_dense();
            for (unsigned k = 0; k < m; ++k) b = a * b - b * a;
            for (std::size_t i = 0; i < safe; ++i) {
                for (std::size_t j = 0; j < safe; ++j) {
                    EXPECT_NEAR(sym.matrix_element(i, j), b(i, j), 1e-8 * std::max(1.0, std::abs(b(i, j))))
                        << "n=" << n << " m=" << m << " (" << i << "," << j << ")";
                }
            }
        }
    }
}

TEST(VacuumExpectation, Examples) {
    EXPECT_EQ(vacuum_expectation(P::number()), 0);
    EXPECT_EQ(vacuum_expectation(commutator(P::annihilation(3), P::creation(3))), 6);
    EXPECT_EQ(vacuum_expectation(multiply(P::annihilation(), P::creation())), 1);
}

TEST(Coefficients, Displacement) {
    const auto s = coefficients(1, 3);
    EXPECT_EQ(s.at(2), 1);
    EXPECT_EQ(s.at(4), 0);
    EXPECT_EQ(s.at(6), 0);
}

TEST(Coefficients, TwoPhotonMatchesHyperbolicSine) {
    // sinh^2(2r) = sum_k (4r)^{2k} / (2 (2k)!)
    const auto s = coefficients(2, 8);
    EXPECT_EQ(s.at(2), 4);
    EXPECT_EQ(s.at(4), mpq_class(16, 3));
    mpz_class factorial = 1;
    mpz_class four_pow = 1;
    for (unsigned m = 1; m <= 16; ++m) {
        factorial *= m;
        four_pow *= 4;
        if (m % 2 == 1) continue;
        mpq_class expected(four_pow, 2 * factorial);
        expected.canonicalize();
        EXPECT_EQ(s.at(m), expected) << m;
    }
}

TEST(Coefficients, SecondOrderIsNTimesFactorial) {
    EXPECT_EQ(coefficients(3, 1).at(2), 18);
    EXPECT_EQ(coefficients(4, 1).at(2), 96);
    mpz_class f = 1;
    for (unsigned n = 1; n <= 6; ++n) {
        f *= n;
        EXPECT_EQ(coefficients(n, 1).at(2), mpq_class(n * f)) << n;
    }
}

TEST(Coefficients, OddPowersVanishAndSeriesSorted) {
    for (unsigned n = 1; n <= 4; ++n) {
        const auto s = coefficients(n, n == 3 ? 20 : 10);
        for (std::size_t i = 0; i < s.entries.size(); ++i) {
            EXPECT_EQ(s.entries[i].m, i);
            if (s.entries[i].m % 2 == 1) EXPECT_EQ(s.entries[i].c, 0) << "n=" << n << " m=" << s.entries[i].m;
        }
        EXPECT_EQ(s.max_order(), n == 3 ? 40u : 20u);
    }
}

TEST(Coefficients, ObservedSignsNonNegative) {
    // observed for these orders, not proven
    for (unsigned n = 1; n <= 4; ++n) {
        for (const auto& e : coefficients(n, 10).entries) EXPECT_GE(e.c, 0) << "n=" << n << " m=" << e.m;
    }
}

TEST(Coefficients, RejectsBadArguments) {
    EXPECT_THROW(coefficients(0, 3), InvalidArgument);
    EXPECT_THROW(coefficients(3, 0), InvalidArgument);
}

TEST(ClosedFormReport, LowOrders) {
    for (unsigned n = 1; n <= 4; ++n) {
        const auto rep = verify_closed_form(n, 20);
        EXPECT_TRUE(rep.passed()) << n;
        EXPECT_EQ(rep.rows.size(), 21u);
        for (const auto& row : rep.rows) {
            ASSERT_TRUE(row.explicit_form.has_value());
            EXPECT_EQ(row.symbolic, row.sum_formula);
            EXPECT_EQ(*row.explicit_form, row.symbolic);
        }
    }
    const auto r4 = verify_closed_form(4, 10);
    for (const auto& row : r4.rows) {
        const long m = row.level;
        EXPECT_EQ(row.symbolic, mpz_class(16 * m * m * m + 24 * m * m + 56 * m + 24));
    }
    for (const auto& row : verify_closed_form(1, 20).rows) EXPECT_EQ(row.symbolic, 1);
    for (const auto& row : verify_closed_form(2, 20).rows) EXPECT_EQ(row.symbolic, 4 * row.level + 2);
}

TEST(ClosedFormReport, HigherOrderWithoutExplicitForm) {
    const auto rep = verify_closed_form(6, 12);
    EXPECT_TRUE(rep.passed());
    EXPECT_FALSE(rep.rows.front().explicit_form.has_value());
}

TEST(TaylorPartialSum, Values) {
    EXPECT_EQ(taylor_partial_sum(coefficients(3, 5), 0.0), 0.0);
    EXPECT_NEAR(taylor_partial_sum(coefficients(2, 20), 0.1), std::pow(std::sinh(0.2), 2), 1e-15);
    EXPECT_NEAR(taylor_partial_sum(coefficients(2, 20), 0.1), 0.04053618592, 1e-11);
    EXPECT_THROW(taylor_partial_sum(coefficients(2, 2), -0.1), InvalidArgument);
}

TEST(Decimal, Rendering) {
    EXPECT_EQ(to_decimal(mpq_class(18)), "18");
    EXPECT_EQ(to_decimal(mpq_class(16, 3)).substr(0, 10), "5.33333333");
    EXPECT_NEAR(log_abs(mpq_class(mpz_class("1" + std::string(400, '0')), 7)), 400 * std::log(10.0) - std::log(7.0),
                1e-9);
}
