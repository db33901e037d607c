#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <speclab/blockops.hpp>
#include <speclab/numlin.hpp>

using namespace speclab;
using Catch::Approx;

namespace {

Eigen::MatrixXcd random_matrix(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::MatrixXcd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = cpx(g(rng), g(rng));
    return m;
}

} // namespace

TEST_CASE("ComplexMatrix validates construction") {
    Eigen::MatrixXcd ok(2, 3);
    ok.setZero();
    ComplexMatrix m(ok);
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 3);

    Eigen::MatrixXcd bad(2, 2);
    bad.setZero();
    bad(0, 1) = cpx(std::numeric_limits<double>::quiet_NaN(), 0);
    CHECK_THROWS_AS(ComplexMatrix(bad), validation_error);
    bad(0, 1) = cpx(0, std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(ComplexMatrix(bad), validation_error);

    CHECK_THROWS_AS(ComplexMatrix(Eigen::MatrixXcd(0, 0)), validation_error);
}

TEST_CASE("eigenvalues of simple matrices") {
    SECTION("diagonal") {
        Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(3, 3);
        d(0, 0) = 1;
        d(1, 1) = 2;
        d(2, 2) = 3;
        auto ev = eigenvalues(ComplexMatrix(d));
        REQUIRE(ev.size() == 3);
        CHECK(ev[0].real() == Approx(1).margin(1e-12));
        CHECK(ev[1].real() == Approx(2).margin(1e-12));
        CHECK(ev[2].real() == Approx(3).margin(1e-12));
    }
    SECTION("antidiagonal delay block, a_1 = 8") {
        Eigen::MatrixXcd t(2, 2);
        t << 0, 1, 8, 0;
        auto ev = eigenvalues(ComplexMatrix(t));
        const double r = 2.0 * std::numbers::sqrt2;
        REQUIRE(ev.size() == 2);
        CHECK(std::abs(ev[0] - cpx(-r)) < 1e-10);
        CHECK(std::abs(ev[1] - cpx(r)) < 1e-10);
    }
    SECTION("upper triangular") {
        Eigen::MatrixXcd t(2, 2);
        t << cpx(1, 1), cpx(5, 0), cpx(0, 0), cpx(2, -1);
        auto ev = eigenvalues(ComplexMatrix(t));
        REQUIRE(ev.size() == 2);
        CHECK(std::abs(ev[0] - cpx(1, 1)) < 1e-10);
        CHECK(std::abs(ev[1] - cpx(2, -1)) < 1e-10);
    }
    SECTION("non-square rejected") {
        CHECK_THROWS_AS(eigenvalues(ComplexMatrix(Eigen::MatrixXcd::Zero(2, 3))),
                        validation_error);
    }
}

TEST_CASE("eigenvalues are sorted by (re, im)") {
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 5; ++rep) {
        auto ev = eigenvalues(ComplexMatrix(random_matrix(12, rng)));
        for (size_t i = 1; i < ev.size(); ++i) CHECK_FALSE(complex_less(ev[i], ev[i - 1]));
    }
}

TEST_CASE("smallest singular value") {
    Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(2, 2);
    CHECK(smallest_singular_value(ComplexMatrix(id)) == Approx(1).margin(1e-14));

    Eigen::MatrixXcd rank1(2, 2);
    rank1 << 1, 1, 1, 1;
    CHECK(smallest_singular_value(ComplexMatrix(rank1)) == 0.0);

    Eigen::MatrixXcd anti(2, 2);
    anti << 0, 1, 8, 0;
    CHECK(smallest_singular_value(ComplexMatrix(anti)) == Approx(1).margin(1e-12));
}

TEST_CASE("resolvent norm basics") {
    Eigen::MatrixXcd zero1 = Eigen::MatrixXcd::Zero(1, 1);
    CHECK(resolvent_norm(ComplexMatrix(zero1), cpx(2)) == Approx(0.5).margin(1e-14));

    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2, 2);
    d(0, 0) = 1;
    d(1, 1) = 4;
    CHECK(resolvent_norm(ComplexMatrix(d), cpx(2)) == Approx(1).margin(1e-13));

    SECTION("infinite at an eigenvalue") {
        CHECK(std::isinf(resolvent_norm(ComplexMatrix(d), cpx(4))));
    }
    SECTION("cross-oracle with the closed delay block formula at 5i") {
        Eigen::MatrixXcd t1(2, 2);
        t1 << 0, 1, 8, 0;
        double svd_route = resolvent_norm(ComplexMatrix(t1), cpx(0, 5));
        double closed = delay_block_norm_closed(1, cpx(0, 5));
        CHECK(svd_route == Approx(closed).epsilon(1e-12));
    }
}

TEST_CASE("resolvent norm times sigma_min is one") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 10; ++rep) {
        ComplexMatrix m(random_matrix(8, rng));
        cpx lambda(std::uniform_real_distribution<double>(-2, 2)(rng),
                   std::uniform_real_distribution<double>(-2, 2)(rng));
        Eigen::MatrixXcd shifted = m.eigen() - lambda * Eigen::MatrixXcd::Identity(8, 8);
        double smin = smallest_singular_value(ComplexMatrix(shifted));
        double rn = resolvent_norm(m, lambda);
        if (smin > 0 && !std::isinf(rn)) CHECK(rn * smin == Approx(1).epsilon(1e-12));
    }
}

TEST_CASE("real-diagonal resolvent norm equals inverse distance") {
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(4, 4);
    const double diag[4] = {-1.5, 0.25, 2.0, 7.0};
    for (int i = 0; i < 4; ++i) d(i, i) = diag[i];
    ComplexMatrix m(d);
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-8, 8);
    for (int rep = 0; rep < 25; ++rep) {
        cpx lambda(u(rng), u(rng));
        double dist = 1e300;
        for (double v : diag) dist = std::min(dist, std::abs(lambda - cpx(v)));
        if (dist < 1e-6) continue;
        CHECK(resolvent_norm(m, lambda) == Approx(1.0 / dist).epsilon(1e-12));
    }
}

TEST_CASE("eigenvalues invariant under permutation similarity") {
    std::mt19937_64 rng(17);
    Eigen::MatrixXcd m = random_matrix(10, rng);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(10);
    perm.setIdentity();
    std::shuffle(perm.indices().data(), perm.indices().data() + 10, rng);
    Eigen::MatrixXcd pm = perm * m * perm.inverse();
    auto a = eigenvalues(ComplexMatrix(m));
    auto b = eigenvalues(ComplexMatrix(pm));
    REQUIRE(a.size() == b.size());
    // both sorted canonically, so multiset agreement is elementwise
    for (size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-9);
}

TEST_CASE("sigma_min agrees with Hermitian eigenpath") {
    std::mt19937_64 rng(19);
    for (int rep = 0; rep < 10; ++rep) {
        Eigen::MatrixXcd m = random_matrix(10, rng);
        double smin = smallest_singular_value(ComplexMatrix(m));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m.adjoint() * m);
        double viaeig = std::sqrt(std::max(0.0, es.eigenvalues()(0)));
        CHECK(smin == Approx(viaeig).margin(1e-8));
    }
}

TEST_CASE("Schur-based resolvent path agrees with full SVD on an audit set") {
    // 20 cases at a dimension where the fast path is active.
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int rep = 0; rep < 4; ++rep) {
        ComplexMatrix m(random_matrix(120, rng));
        SchurResolvent fast(m);
        SchurResolvent::WarmStart warm;
        for (int shot = 0; shot < 5; ++shot) {
            cpx lambda(u(rng), u(rng));
            double a = fast.resolvent_norm(lambda, &warm);
            double b = resolvent_norm(m, lambda);
            if (std::isinf(a) || std::isinf(b)) {
                CHECK(std::isinf(a) == std::isinf(b));
            } else {
                CHECK(a == Approx(b).epsilon(1e-8));
            }
        }
    }
}

TEST_CASE("singularity floor reports the infinity sentinel") {
    // Numerically singular but not exactly zero: tiny perturbation of rank-1.
    Eigen::MatrixXcd m(2, 2);
    m << 1.0, 1.0, 1.0, 1.0 + 1e-18;
    CHECK(std::isinf(resolvent_norm(ComplexMatrix(m), cpx(0))));
}
