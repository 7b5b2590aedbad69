#include <cmath>
#include <complex>

#include <gtest/gtest.h>

#include "squeezelab/fock.hpp"

using namespace squeezelab;

TEST(FockDim, RejectsFewerThanTwoLevels) {
    EXPECT_THROW(FockDim(1), InvalidArgument);
    EXPECT_THROW(FockDim(0), InvalidArgument);
    EXPECT_EQ(FockDim(2).size(), 2u);
}

TEST(SqueezeParams, Validates) {
    EXPECT_THROW(SqueezeParams(0, 0.1), InvalidArgument);
    EXPECT_THROW(SqueezeParams(2, cplx(std::nan(""), 0.0)), InvalidArgument);
    EXPECT_THROW(SqueezeParams(2, cplx(INFINITY, 0.0)), InvalidArgument);
    EXPECT_TRUE(SqueezeParams(2, 0.3).is_real());
}

TEST(Annihilation, ThreeLevels) {
    const auto a = annihilation_matrix(FockDim(3));
    EXPECT_EQ(a(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(a(1, 2), std::sqrt(2.0));
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            if (j != i + 1) EXPECT_EQ(a(i, j), 0.0) << i << "," << j;
        }
    }
}

TEST(Annihilation, TwoLevels) {
    const auto a = annihilation_matrix(FockDim(2));
    EXPECT_EQ(a(0, 1), 1.0);
    EXPECT_EQ(a(1, 0), 0.0);
    EXPECT_EQ(a(0, 0), 0.0);
    EXPECT_EQ(a(1, 1), 0.0);
}

TEST(Annihilation, AdjointIsCreation) {
    const auto ad = annihilation_matrix(FockDim(6)).adjoint();
    for (std::size_t k = 1; k < 6; ++k) EXPECT_DOUBLE_EQ(ad(k, k - 1), std::sqrt(static_cast<double>(k)));
    EXPECT_EQ(ad(0, 1), 0.0);
}

TEST(Power, ZeroIsIdentity) {
    const auto id = power(annihilation_matrix(FockDim(5)), 0);
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(id(i, j), i == j ? 1.0 : 0.0);
    }
}

TEST(Power, SquareOfAnnihilation) {
    const auto a2 = power(annihilation_matrix(FockDim(4)), 2);
    EXPECT_NEAR(a2(0, 2), std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(a2(1, 3), std::sqrt(6.0), 1e-15);
    EXPECT_EQ(a2.diagonals().size(), 1u);
    EXPECT_EQ(a2.diagonals().begin()->first, 2);
}

TEST(Power, NilpotentBeyondDimension) {
    const FockDim dim(4);
    for (unsigned n : {4u, 5u, 9u}) {
        const auto p = power(annihilation_matrix(dim), n);
        EXPECT_EQ(p.to_dense().cwiseAbs().maxCoeff(), 0.0) << n;
        EXPECT_EQ(annihilation_power(dim, n).to_dense().cwiseAbs().maxCoeff(), 0.0) << n;
    }
}

TEST(Power, LadderPowerMatchesRepeatedProduct) {
    const FockDim dim(40);
    for (unsigned n = 1; n <= 5; ++n) {
        const auto exact = annihilation_power(dim, n).to_dense();
        const auto product = power(annihilation_matrix(dim), n).to_dense();
        EXPECT_LE((exact - product).cwiseAbs().maxCoeff() / exact.cwiseAbs().maxCoeff(), 1e-14) << n;
    }
}

TEST(Power, ExactEntriesAtLargeLevels) {
    // sqrt(k (k-1) (k-2)) for k = 100000
    const FockDim dim(100001);
    const auto a3 = annihilation_power(dim, 3);
    const double k = 100000.0;
    EXPECT_DOUBLE_EQ(a3(99997, 100000), std::sqrt(k * (k - 1) * (k - 2)));
}

TEST(Generator, DisplacementExample) {
    const auto k = generator(SqueezeParams(1, 1.0), FockDim(3));
    EXPECT_EQ(k(1, 0), cplx(1.0));
    EXPECT_EQ(k(2, 1), cplx(std::sqrt(2.0)));
    EXPECT_EQ(k(0, 1), cplx(-1.0));
    EXPECT_EQ(k(1, 2), cplx(-std::sqrt(2.0)));
    EXPECT_EQ(k(0, 0), cplx(0.0));
    EXPECT_EQ(k(2, 0), cplx(0.0));
}

TEST(Generator, ZeroAmplitudeIsZero) {
    const auto k = generator(SqueezeParams(3, 0.0), FockDim(10));
    EXPECT_EQ(k.to_dense().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Generator, AntiHermitianEntrywise) {
    for (unsigned n = 1; n <= 5; ++n) {
        for (const cplx r : {cplx(0.1), cplx(0.3, -0.7), cplx(-2.0, 0.25), std::polar(1.3, 2.1)}) {
            const auto k = generator(SqueezeParams(n, r), FockDim(30)).to_dense();
            const Eigen::MatrixXcd sum = k + k.adjoint();
            EXPECT_EQ(sum.cwiseAbs().maxCoeff(), 0.0) << "n=" << n << " r=" << r;
        }
    }
    const auto k3 = generator(SqueezeParams(3, 0.1), FockDim(10));
    const auto kd = k3.adjoint();
    for (std::size_t i = 0; i < 10; ++i) {
        for (std::size_t j = 0; j < 10; ++j) EXPECT_EQ(k3(i, j) + kd(i, j), cplx(0.0));
    }
}

TEST(Generator, RealParameterIsRealAntisymmetric) {
    const auto k = generator_real(3, 0.4, FockDim(20)).to_dense();
    EXPECT_EQ((k + k.transpose()).cwiseAbs().maxCoeff(), 0.0);
    const auto kc = generator(SqueezeParams(3, 0.4), FockDim(20)).to_dense();
    EXPECT_EQ((kc.real() - k).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(kc.imag().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Generator, RejectsTruncationNotAboveOrder) {
    EXPECT_THROW(generator(SqueezeParams(3, 0.1), FockDim(3)), InvalidArgument);
    EXPECT_THROW(generator_real(4, 0.1, FockDim(2)), InvalidArgument);
    EXPECT_NO_THROW(generator(SqueezeParams(3, 0.1), FockDim(4)));
}

TEST(ClosedForm, TwoPhotonDiagonal) {
    const auto a2 = a_n_commutator_closed_form(2, FockDim(6));
    EXPECT_TRUE(a2.is_diagonal());
    for (std::size_t m = 0; m < 6; ++m) EXPECT_EQ(a2(m, m), 4.0 * m + 2.0);
}

TEST(ClosedForm, ExplicitLowOrders) {
    const auto a3 = a_n_commutator_closed_form(3, FockDim(8));
    EXPECT_EQ(a3(0, 0), 6.0);
    EXPECT_EQ(a3(1, 1), 24.0);
    const auto a4 = a_n_commutator_closed_form(4, FockDim(8));
    EXPECT_EQ(a4(0, 0), 24.0);
    for (std::size_t m = 0; m < 8; ++m) {
        const double x = static_cast<double>(m);
        EXPECT_EQ(a3(m, m), 9 * x * x + 9 * x + 6);
        EXPECT_EQ(a4(m, m), 16 * x * x * x + 24 * x * x + 56 * x + 24);
        EXPECT_EQ(a_n_commutator_closed_form(1, FockDim(8))(m, m), 1.0);
    }
}

TEST(ClosedForm, MinimumIsFactorial) {
    double factorial = 1.0;
    for (unsigned n = 1; n <= 6; ++n) {
        factorial *= n;
        const auto diag = a_n_commutator_closed_form(n, FockDim(200)).main_diagonal();
        EXPECT_EQ(diag[0], factorial);
        for (const double v : diag) EXPECT_GE(v, factorial);
    }
}

// [a^n, a+^n] built from truncated matrices agrees with the closed form away
// from the top n levels.
TEST(ClosedForm, MatchesTruncatedMatrixCommutator) {
    for (unsigned n = 1; n <= 4; ++n) {
        for (std::size_t N : {std::size_t{2 * n + 2}, std::size_t{2 * n + 7}, std::size_t{60}}) {
            const FockDim dim(N);
            const auto an = power(annihilation_matrix(dim), n);
            const auto adn = power(creation_matrix(dim), n);
            const auto comm = (an * adn - adn * an).to_dense();
            const auto closed = a_n_commutator_closed_form(n, dim).to_dense();
            for (std::size_t i = 0; i + n < N; ++i) {
                for (std::size_t j = 0; j + n < N; ++j) {
                    EXPECT_NEAR(comm(i, j), closed(i, j), 1e-9 * std::max(1.0, std::abs(closed(i, j))))
                        << "n=" << n << " N=" << N << " (" << i << "," << j << ")";
                }
            }
        }
    }
}

TEST(BandedOperator, ApplyMatchesDense) {
    const FockDim dim(25);
    const auto k = generator(SqueezeParams(3, cplx(0.2, 0.5)), dim);
    std::vector<cplx> x(25);
    for (std::size_t i = 0; i < 25; ++i) x[i] = cplx(std::sin(1.0 + i), std::cos(2.0 * i));
    const auto y = k.apply(std::span<const cplx>(x));
    const Eigen::VectorXcd ref = k.to_dense() * Eigen::Map<const Eigen::VectorXcd>(x.data(), 25);
    for (std::size_t i = 0; i < 25; ++i) EXPECT_NEAR(std::abs(y[i] - ref[i]), 0.0, 1e-14);
}

TEST(BandedOperator, RejectsWrongDiagonalLength) {
    RealOperator op(FockDim(5));
    EXPECT_THROW(op.set_diagonal(1, std::vector<double>(5)), InvalidArgument);
    EXPECT_THROW(op.set_diagonal(7, std::vector<double>(1)), InvalidArgument);
    EXPECT_NO_THROW(op.set_diagonal(-2, std::vector<double>(3)));
}

TEST(BandedOperator, ProductMatchesDense) {
    const FockDim dim(12);
    const auto a = annihilation_power(dim, 2);
    const auto b = creation_power(dim, 3) + number_operator(dim);
    const Eigen::MatrixXd ref = a.to_dense() * b.to_dense();
    EXPECT_LE(((a * b).to_dense() - ref).cwiseAbs().maxCoeff(), 1e-12);
}
