#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "twinmet/matrix_core.hpp"

using namespace twinmet;
using Catch::Approx;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd antidiag2(double a, double b) {
    MatrixXd m(2, 2);
    m << 0, a, b, 0;
    return m;
}

/// Random invertible matrix with singular values log-uniform in
/// [1/cond_half, cond_half]; condition number bounded by cond_half^2.
MatrixXd random_invertible(int n, std::mt19937_64& rng, double cond_half = 30.0) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    MatrixXd A(n, n), B(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            A(i, j) = gauss(rng);
            B(i, j) = gauss(rng);
        }
    Eigen::HouseholderQR<MatrixXd> qa(A), qb(B);
    MatrixXd Q1 = qa.householderQ();
    MatrixXd Q2 = qb.householderQ();
    std::uniform_real_distribution<double> logu(-std::log(cond_half), std::log(cond_half));
    VectorXd sv(n);
    for (int i = 0; i < n; ++i) sv[i] = std::exp(logu(rng));
    return Q1 * sv.asDiagonal() * Q2;
}

VectorXd random_signs(int n, std::mt19937_64& rng) {
    std::bernoulli_distribution coin(0.5);
    VectorXd d(n);
    for (int i = 0; i < n; ++i) d[i] = coin(rng) ? 1.0 : -1.0;
    return d;
}

} // namespace

TEST_CASE("twin_from_k basic and failing cases") {
    SECTION("identity") {
        auto h = SymMatrix::make(MatrixXd::Identity(2, 2));
        auto g = twin_from_k(h, MatrixXd::Identity(2, 2), 1);
        REQUIRE((g.mat() - MatrixXd::Identity(2, 2)).norm() == 0.0);
    }
    SECTION("sigma mismatch is a named precondition error") {
        auto h = SymMatrix::make(Eigen::Vector2d(1, -1).asDiagonal().toDenseMatrix());
        // K = antidiag(1,1): K^2 = I but K^t h K = -h
        try {
            twin_from_k(h, antidiag2(1, 1), 1);
            FAIL("expected PreconditionError");
        } catch (const PreconditionError& e) {
            REQUIRE(e.identity == "K^t h K = eps*h");
            REQUIRE(e.residual > 0.5);
        }
    }
    SECTION("complex-type structure on a split metric") {
        auto h = SymMatrix::make(Eigen::Vector2d(1, -1).asDiagonal().toDenseMatrix());
        MatrixXd K(2, 2);
        K << 0, -1, 1, 0;
        auto g = twin_from_k(h, K, -1);
        MatrixXd expect(2, 2);
        expect << 0, -1, -1, 0; // hand multiplication of hK
        REQUIRE((g.mat() - expect).norm() <= 1e-15);
        // (h^-1 g)^2 = -I
        MatrixXd P = h.mat().inverse() * g.mat();
        REQUIRE(((P * P) + MatrixXd::Identity(2, 2)).norm() <= 1e-14);
    }
}

TEST_CASE("k_from_pair examples") {
    SECTION("identity pair") {
        auto h = SymMatrix::make(MatrixXd::Identity(3, 3));
        auto kp = k_from_pair(h, h);
        REQUIRE((kp.K - MatrixXd::Identity(3, 3)).norm() <= 1e-14);
        REQUIRE(kp.epsilon == Approx(1.0));
    }
    SECTION("split pair gives the complex structure") {
        auto h = SymMatrix::make(Eigen::Vector2d(1, -1).asDiagonal().toDenseMatrix());
        auto g = SymMatrix::make(antidiag2(1, 1));
        auto kp = k_from_pair(h, g);
        MatrixXd expect(2, 2);
        expect << 0, 1, -1, 0; // hand multiplication of h^-1 g
        REQUIRE((kp.K - expect).norm() <= 1e-14);
        REQUIRE(kp.epsilon == Approx(-1.0));
    }
    SECTION("scaling and rescale_to_canonical") {
        auto h = SymMatrix::make(MatrixXd::Identity(2, 2));
        auto g = SymMatrix::make(2.0 * MatrixXd::Identity(2, 2));
        auto kp = k_from_pair(h, g);
        REQUIRE(kp.epsilon == Approx(4.0));
        auto rp = rescale_to_canonical(h, g, kp.epsilon);
        REQUIRE(rp.sign == 1);
        REQUIRE((rp.g.mat() - MatrixXd::Identity(2, 2)).norm() <= 1e-15);
        auto kp2 = k_from_pair(rp.h, rp.g);
        REQUIRE(kp2.epsilon == Approx(1.0));
    }
    SECTION("not a K-pair") {
        auto h = SymMatrix::make(MatrixXd::Identity(2, 2));
        MatrixXd gm(2, 2);
        gm << 1, 0, 0, 2;
        REQUIRE_THROWS_AS(k_from_pair(h, SymMatrix::make(gm)), PreconditionError);
    }
}

TEST_CASE("rescale examples") {
    auto h = SymMatrix::make(Eigen::Vector2d(1, -1).asDiagonal().toDenseMatrix());
    auto g = SymMatrix::make(antidiag2(3, 3));
    auto rp = rescale_to_canonical(h, g, -9.0);
    REQUIRE(rp.sign == -1);
    REQUIRE((rp.g.mat() - antidiag2(1, 1)).norm() <= 1e-15);
    REQUIRE_THROWS_AS(rescale_to_canonical(h, g, 0.0), AlmostTangentError);
}

TEST_CASE("involution_decompose canonical cases") {
    SECTION("identity") {
        auto d = involution_decompose(MatrixXd::Identity(4, 4), 1);
        REQUIRE(d.k == 0);
        REQUIRE((d.M * canonical_d_k(4, 0) * d.M.inverse() - MatrixXd::Identity(4, 4)).norm() <=
                1e-12);
    }
    SECTION("2x2 swap involution") {
        MatrixXd P = antidiag2(1, 1);
        auto d = involution_decompose(P, 1);
        REQUIRE(d.k == 1);
        // first column spans the -1 eigenspace: direction (1,-1)/sqrt(2)
        VectorXd v = d.M.col(0);
        REQUIRE(std::abs(std::abs(v[0]) - 1 / std::sqrt(2.0)) <= 1e-12);
        REQUIRE(v[0] * v[1] < 0);
        REQUIRE((P * d.M - d.M * canonical_d_k(2, 1)).norm() <= 1e-12);
    }
    SECTION("canonical J0 decomposes with M = I") {
        MatrixXd J = canonical_j0(4);
        auto d = involution_decompose(J, -1);
        REQUIRE((d.M - MatrixXd::Identity(4, 4)).norm() <= 1e-12);
    }
    SECTION("odd dimension with eps = -1") {
        REQUIRE_THROWS_AS(involution_decompose(MatrixXd::Identity(3, 3), -1),
                          PreconditionError);
    }
    SECTION("not an involution") {
        MatrixXd P = MatrixXd::Ones(2, 2);
        REQUIRE_THROWS_AS(involution_decompose(P, 1), PreconditionError);
    }
    SECTION("random conjugates of J0") {
        std::mt19937_64 rng(99);
        for (int trial = 0; trial < 25; ++trial) {
            const int m = 1 + static_cast<int>(rng() % 4);
            const int n = 2 * m;
            MatrixXd T = random_invertible(n, rng);
            MatrixXd P = T * canonical_j0(n) * T.inverse();
            auto d = involution_decompose(P, -1, 1e-7);
            REQUIRE((P * d.M - d.M * canonical_j0(n)).norm() <= 1e-7 * d.M.norm());
        }
    }
}

TEST_CASE("takagi_like_factor") {
    SECTION("identity") {
        auto tf = takagi_like_factor(MatrixXcd::Identity(3, 3));
        REQUIRE((tf.N.transpose() * tf.N - MatrixXcd::Identity(3, 3)).norm() <= 1e-12);
    }
    SECTION("1x1 example [2i] accepts any N with N^2 = 2i") {
        MatrixXcd C(1, 1);
        C(0, 0) = std::complex<double>(0, 2);
        auto tf = takagi_like_factor(C);
        REQUIRE(std::abs(tf.N(0, 0) * tf.N(0, 0) - C(0, 0)) <= 1e-12);
        // (1+i)^2 = 2i; any solution has modulus sqrt(2)
        REQUIRE(std::abs(tf.N(0, 0)) == Approx(std::sqrt(2.0)).margin(1e-12));
    }
    SECTION("random nondegenerate complex symmetric") {
        std::mt19937_64 rng(1234);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int trial = 0; trial < 60; ++trial) {
            const int m = 1 + static_cast<int>(rng() % 4);
            MatrixXcd C(m, m);
            for (int i = 0; i < m; ++i)
                for (int j = i; j < m; ++j) {
                    C(i, j) = std::complex<double>(gauss(rng), gauss(rng));
                    C(j, i) = C(i, j);
                }
            Eigen::JacobiSVD<MatrixXcd> svd(C);
            if (svd.singularValues()(m - 1) < 1e-3) continue;
            auto tf = takagi_like_factor(C);
            REQUIRE((tf.N.transpose() * tf.N - C).norm() <= 1e-9 * C.norm());
        }
    }
    SECTION("singular input is rejected") {
        MatrixXcd C = MatrixXcd::Zero(2, 2);
        C(0, 0) = 1.0;
        REQUIRE_THROWS_AS(takagi_like_factor(C), SingularError);
    }
}

TEST_CASE("simultaneous_congruence: worked product example") {
    // h = antidiag(1,1), g = I
    auto h = SymMatrix::make(antidiag2(1, 1));
    auto g = SymMatrix::make(MatrixXd::Identity(2, 2));
    auto dec = simultaneous_congruence(h, g);
    REQUIRE(dec.case_tag == CongruenceDecomposition::Case::Product);
    REQUIRE(dec.k == 1);
    REQUIRE(dec.residual_h <= 1e-9);
    REQUIRE(dec.residual_g <= 1e-9);
    // canonical forms: D_h carries signature (1,1) of h, D_g the identity
    REQUIRE(dec.D_h.diagonal().sum() == Approx(0.0).margin(1e-14));
    REQUIRE((dec.D_g - MatrixXd::Identity(2, 2)).norm() <= 1e-14);
}

TEST_CASE("simultaneous_congruence: canonical complex pair is a fixed point") {
    MatrixXd Kh(2, 2), Kg(2, 2);
    Kh << 1, 0, 0, -1;
    Kg << 0, 1, 1, 0;
    auto dec = simultaneous_congruence(SymMatrix::make(Kh), SymMatrix::make(Kg));
    REQUIRE(dec.case_tag == CongruenceDecomposition::Case::Complex);
    REQUIRE((dec.D_h - Kh).norm() == 0.0);
    REQUIRE((dec.D_g - Kg).norm() == 0.0);
    REQUIRE((dec.R - MatrixXd::Identity(2, 2)).norm() <= 1e-12);
}

TEST_CASE("property: product-case reconstruction and invariants") {
    std::mt19937_64 rng(20250809);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 7);
        MatrixXd R0 = random_invertible(n, rng);
        VectorXd dh = random_signs(n, rng);
        VectorXd dk = random_signs(n, rng);
        MatrixXd h = R0.transpose() * MatrixXd(dh.asDiagonal()) * R0;
        MatrixXd g = R0.transpose() * MatrixXd((dh.cwiseProduct(dk)).asDiagonal()) * R0;
        auto dec = simultaneous_congruence(SymMatrix::make(h), SymMatrix::make(g));
        REQUIRE(dec.case_tag == CongruenceDecomposition::Case::Product);
        REQUIRE(dec.residual_h <= 1e-9);
        REQUIRE(dec.residual_g <= 1e-9);
        // k equals the number of -1 entries of d_k
        int expect_k = 0;
        for (int i = 0; i < n; ++i)
            if (dk[i] < 0) ++expect_k;
        REQUIRE(dec.k == expect_k);

        // determinant law (det g / det h)^2 = eps^n with eps = 1
        const double ratio = g.determinant() / h.determinant();
        REQUIRE(ratio * ratio == Approx(1.0).margin(1e-6));

        // congruence transport preserves k; the transport stays moderate so
        // the transported pair remains inside the stated condition budget
        MatrixXd A = random_invertible(n, rng, 4.0);
        MatrixXd ht = A.transpose() * h * A;
        MatrixXd gt = A.transpose() * g * A;
        auto dec2 = simultaneous_congruence(SymMatrix::make(0.5 * (ht + ht.transpose())),
                                            SymMatrix::make(0.5 * (gt + gt.transpose())));
        REQUIRE(dec2.k == dec.k);
    }
}

TEST_CASE("property: complex-case reconstruction") {
    std::mt19937_64 rng(777);
    for (int trial = 0; trial < 100; ++trial) {
        const int m = 1 + static_cast<int>(rng() % 4);
        const int n = 2 * m;
        MatrixXd Kh = MatrixXd::Zero(n, n), Kg = MatrixXd::Zero(n, n);
        Kh.topLeftCorner(m, m).setIdentity();
        Kh.bottomRightCorner(m, m) = -MatrixXd::Identity(m, m);
        Kg.topRightCorner(m, m).setIdentity();
        Kg.bottomLeftCorner(m, m).setIdentity();
        MatrixXd R0 = random_invertible(n, rng);
        MatrixXd h = R0.transpose() * Kh * R0;
        MatrixXd g = R0.transpose() * Kg * R0;
        auto dec = simultaneous_congruence(SymMatrix::make(h), SymMatrix::make(g));
        REQUIRE(dec.case_tag == CongruenceDecomposition::Case::Complex);
        REQUIRE(dec.residual_h <= 1e-9);
        REQUIRE(dec.residual_g <= 1e-9);
        REQUIRE((dec.D_h - Kh).norm() == 0.0);
        REQUIRE((dec.D_g - Kg).norm() == 0.0);

        // determinant law with eps = -1: (det g / det h)^2 = (-1)^n
        const double ratio = g.determinant() / h.determinant();
        REQUIRE(ratio * ratio == Approx(std::pow(-1.0, n)).margin(1e-6));
    }
}

TEST_CASE("property: swap invariance of epsilon") {
    std::mt19937_64 rng(555);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 * (1 + static_cast<int>(rng() % 3));
        MatrixXd R0 = random_invertible(n, rng);
        VectorXd dh = random_signs(n, rng);
        VectorXd dk = random_signs(n, rng);
        std::uniform_real_distribution<double> eps_u(0.2, 5.0);
        const double scale = eps_u(rng);
        MatrixXd h = R0.transpose() * MatrixXd(dh.asDiagonal()) * R0;
        MatrixXd g = scale * (R0.transpose() * MatrixXd(dh.cwiseProduct(dk).asDiagonal()) * R0);
        auto fwd = k_from_pair(SymMatrix::make(h), SymMatrix::make(g));
        auto bwd = k_from_pair(SymMatrix::make(g), SymMatrix::make(h));
        REQUIRE(fwd.epsilon * bwd.epsilon == Approx(1.0).margin(1e-8));
    }
}

TEST_CASE("signature") {
    REQUIRE(signature(SymMatrix::make(MatrixXd::Identity(4, 4))) == std::make_pair(4, 0));
    MatrixXd mink = Eigen::Vector4d(-1, 1, 1, 1).asDiagonal();
    REQUIRE(signature(SymMatrix::make(mink)) == std::make_pair(3, 1));
    MatrixXd anti = Eigen::Vector2d(2, -2).asDiagonal();
    REQUIRE(signature(SymMatrix::make(anti)) == std::make_pair(1, 1));
    REQUIRE_THROWS_AS(signature(SymMatrix::make(MatrixXd::Zero(2, 2))), SingularError);
}
