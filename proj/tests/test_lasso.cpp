#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "ddm/scsp/lasso.hpp"
#include "oracles.hpp"

using namespace ddm;
using namespace ddm::scsp;
using numeric::Matrix;
using numeric::RngStream;

namespace {

Matrix random_dictionary(std::size_t d, std::size_t n, RngStream& rng) {
    Matrix m(d, n);
    for (double& v : m.values()) v = rng.normal();
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) s += m(i, j) * m(i, j);
        for (std::size_t i = 0; i < d; ++i) m(i, j) /= std::sqrt(s);
    }
    return m;
}

std::vector<oracle::Vec> columns_of(const Matrix& m) {
    std::vector<oracle::Vec> cols(m.cols(), oracle::Vec(m.rows()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) cols[j][i] = m(i, j);
    return cols;
}

} // namespace

TEST(SoftThreshold, Cases) {
    EXPECT_EQ(soft_threshold(1.0, 0.5), 0.5);
    EXPECT_DOUBLE_EQ(soft_threshold(-0.8, 0.5), -0.3);
    EXPECT_EQ(soft_threshold(0.2, 0.5), 0.0);
}

TEST(Lasso, IdentityWithoutPenaltyReturnsSignal) {
    const std::vector<double> x{0.3, -1.2, 2.5};
    const auto r = sparse_code(x, Matrix::identity(3), 0.0);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(r.coefficients[i], x[i], 1e-12);
}

TEST(Lasso, IdentitySoftThresholds) {
    const std::vector<double> x{1.0, 0.2, -0.8};
    const auto r = sparse_code(x, Matrix::identity(3), 0.5);
    EXPECT_NEAR(r.coefficients[0], 0.5, 1e-12);
    EXPECT_EQ(r.coefficients[1], 0.0);
    EXPECT_NEAR(r.coefficients[2], -0.3, 1e-12);
}

TEST(Lasso, MatchesBruteForceOnSmallProblems) {
    RngStream rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix D = random_dictionary(4, 3, rng);
        std::vector<double> x(4);
        for (double& v : x) v = rng.normal();
        const double lambda = rng.uniform(0.01, 0.8);
        const auto r = sparse_code(x, D, lambda);
        const auto cols = columns_of(D);
        const auto ref = oracle::lasso_brute_force(cols, x, lambda);
        EXPECT_LE(oracle::lasso_objective(cols, x, r.coefficients, lambda),
                  oracle::lasso_objective(cols, x, ref, lambda) + 1e-6);
        EXPECT_LE(r.kkt_violation, 1e-6);
    }
}

TEST(Lasso, LargePenaltyGivesZero) {
    RngStream rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix D = random_dictionary(6, 5, rng);
        std::vector<double> x(6);
        for (double& v : x) v = rng.normal();
        double top = 0.0;
        for (double c : numeric::matvec_transposed(D, x)) top = std::max(top, std::abs(c));
        const auto r = sparse_code(x, D, top * (1.0 + 1e-9));
        for (double b : r.coefficients) EXPECT_EQ(b, 0.0);
    }
}

TEST(Lasso, L1NormShrinksAsPenaltyGrows) {
    RngStream rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix D = random_dictionary(8, 6, rng);
        std::vector<double> x(8);
        for (double& v : x) v = rng.normal();
        double prev = std::numeric_limits<double>::infinity();
        for (double lambda : {0.01, 0.05, 0.1, 0.3, 0.6, 1.0}) {
            double l1 = 0.0;
            for (double b : sparse_code(x, D, lambda).coefficients) l1 += std::abs(b);
            EXPECT_LE(l1, prev + 1e-9);
            prev = l1;
        }
    }
}

TEST(Lasso, MaskedAtomsStayZero) {
    RngStream rng(14);
    const Matrix D = random_dictionary(5, 4, rng);
    const std::vector<double> x{1.0, -0.5, 0.3, 0.8, -1.1};
    const Matrix atoms = numeric::transpose(D);
    const std::vector<std::uint8_t> mask{0, 1, 0, 1};
    const auto r = lasso_gram(gram_of_rows(atoms), numeric::matvec(atoms, x), 0.05, {}, mask);
    EXPECT_EQ(r.coefficients[1], 0.0);
    EXPECT_EQ(r.coefficients[3], 0.0);
    // same as coding over the two remaining atoms
    Matrix sub(5, 2);
    for (std::size_t i = 0; i < 5; ++i) {
        sub(i, 0) = D(i, 0);
        sub(i, 1) = D(i, 2);
    }
    const auto s = sparse_code(x, sub, 0.05);
    EXPECT_NEAR(r.coefficients[0], s.coefficients[0], 1e-9);
    EXPECT_NEAR(r.coefficients[2], s.coefficients[1], 1e-9);
}

TEST(Lasso, DuplicateAtomsStillSatisfyOptimality) {
    Matrix D(3, 3);
    D(0, 0) = 1.0;
    D(0, 1) = 1.0; // exact copy of atom 0
    D(1, 2) = 1.0;
    const std::vector<double> x{2.0, 1.0, 0.5};
    const auto r = sparse_code(x, D, 0.1);
    EXPECT_NEAR(r.coefficients[0] + r.coefficients[1], 1.9, 1e-9);
    EXPECT_NEAR(r.coefficients[2], 0.9, 1e-9);
    EXPECT_LE(r.kkt_violation, 1e-6);
}

TEST(Lasso, SweepBudgetExhaustedIsNumericError) {
    RngStream rng(15);
    const Matrix D = random_dictionary(8, 6, rng);
    std::vector<double> x(8);
    for (double& v : x) v = rng.normal();
    LassoOptions o;
    o.max_sweeps = 0;
    try {
        sparse_code(x, D, 0.01, o);
        FAIL();
    } catch (const NumericError& e) {
        EXPECT_NE(std::string(e.what()).find("KKT violation"), std::string::npos);
    }
}

TEST(Lasso, RejectsNegativePenaltyAndShapeMismatch) {
    const std::vector<double> x{1.0, 2.0};
    EXPECT_THROW(sparse_code(x, Matrix::identity(2), -1.0), ConfigError);
    EXPECT_THROW(sparse_code(x, Matrix::identity(3), 0.1), ShapeError);
}
