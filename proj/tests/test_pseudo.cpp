#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include <speclab/blockops.hpp>
#include <speclab/pseudo.hpp>

using namespace speclab;
using Catch::Approx;

namespace {

ComplexMatrix diag2(double a, double b) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return ComplexMatrix(m);
}

ComplexMatrix scalar_zero() { return ComplexMatrix(Eigen::MatrixXcd::Zero(1, 1)); }

} // namespace

TEST_CASE("GridSpec validation and layout") {
    GridSpec g{-1, 1, -1, 1, 5, 3};
    g.validate();
    CHECK(g.dx() == Approx(0.5));
    CHECK(g.dy() == Approx(1.0));
    CHECK(g.node(0, 0) == cpx(-1, -1));
    CHECK(g.node(4, 2) == cpx(1, 1));
    CHECK(g.flat(1, 2) == 2 * 5 + 1);

    CHECK_THROWS_AS((GridSpec{1, 1, 0, 1, 2, 2}.validate()), validation_error);
    CHECK_THROWS_AS((GridSpec{0, 1, 0, 1, 1, 2}.validate()), validation_error);
}

TEST_CASE("field evaluates the resolvent norm per node") {
    SECTION("scalar zero matrix: value 1 at lambda = 1") {
        GridSpec g{1, 2, 0, 1, 2, 2};
        PseudospectrumField f = field(scalar_zero(), g);
        CHECK(f.at(0, 0) == Approx(1.0).margin(1e-14));
        CHECK(f.matrix_dim == 1);
        CHECK(f.values.size() == 4);
    }
    SECTION("selfadjoint diag(1,4): value = 1/dist to spectrum") {
        GridSpec g{-1, 6, -2, 2, 15, 9};
        PseudospectrumField f = field(diag2(1, 4), g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                cpx z = g.node(i, j);
                double d = std::min(std::abs(z - cpx(1)), std::abs(z - cpx(4)));
                if (d > 1e-9) CHECK(f.at(i, j) == Approx(1.0 / d).epsilon(1e-12));
            }
    }
    SECTION("delay truncation A_2 at 5i stays below the limit norm 1") {
        ComplexMatrix a2 = assemble(delay_spec(), 2);
        REQUIRE(a2.rows() == 8);
        GridSpec g{-0.5, 0.5, 4.5, 5.5, 3, 3};
        PseudospectrumField f = field(a2, g);
        CHECK(f.at(1, 1) <= 1.0 + 1e-8);
    }
}

TEST_CASE("membership follows the strict open-set convention") {
    CHECK(membership(scalar_zero(), cpx(0.5), 1.0));
    CHECK_FALSE(membership(scalar_zero(), cpx(2.0), 1.0));
    // boundary |lambda| = eps excluded: resolvent norm equals 1/eps exactly
    CHECK_FALSE(membership(scalar_zero(), cpx(1.0), 1.0));
    CHECK_THROWS_AS(membership(scalar_zero(), cpx(0), 0.0), validation_error);
    CHECK_THROWS_AS(membership(scalar_zero(), cpx(0), -1.0), validation_error);
}

TEST_CASE("sublevel_points collects strict sublevel nodes") {
    SECTION("constant low field is empty") {
        PseudospectrumField f;
        f.grid = GridSpec{-1, 1, -1, 1, 5, 5};
        f.values.assign(25, 0.1);
        f.matrix_dim = 1;
        CHECK(sublevel_points(f, 1.0).empty());
    }
    SECTION("scalar zero matrix flags exactly |lambda| < 1") {
        GridSpec g{-2, 2, -2, 2, 41, 41};
        PseudospectrumField f = field(scalar_zero(), g);
        auto pts = sublevel_points(f, 1.0);
        std::set<std::pair<int, int>> flagged;
        for (const cpx& z : pts) {
            CHECK(std::abs(z) < 1.0);
            flagged.insert({static_cast<int>(std::lround((z.real() + 2) / g.dx())),
                            static_cast<int>(std::lround((z.imag() + 2) / g.dy()))});
        }
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                if (std::abs(g.node(i, j)) < 1.0 - 1e-12)
                    CHECK(flagged.count({i, j}) == 1);
    }
    SECTION("selfadjoint diag(1,4) at eps = 0.5") {
        GridSpec g{0, 5, -1, 1, 26, 11};
        PseudospectrumField f = field(diag2(1, 4), g);
        for (const cpx& z : sublevel_points(f, 0.5)) {
            double d = std::min(std::abs(z - cpx(1)), std::abs(z - cpx(4)));
            CHECK(d < 0.5);
        }
    }
}

TEST_CASE("infinity sentinel sits above every threshold") {
    Eigen::MatrixXcd sing(2, 2);
    sing << 1, 1, 1, 1;
    GridSpec g{-1, 1, -1, 1, 3, 3};
    PseudospectrumField f = field(ComplexMatrix(sing), g);
    CHECK(std::isinf(f.at(1, 1))); // node 0 is an eigenvalue
    auto pts = sublevel_points(f, 1e-9);
    bool found = false;
    for (const cpx& z : pts) found = found || std::abs(z) < 1e-12;
    CHECK(found);
    // contours at a tiny eps still enclose the singular node
    auto cs = contours(f, {1e-9});
    REQUIRE(cs.size() == 1);
    CHECK_FALSE(cs[0].polylines.empty());
}

TEST_CASE("contours trace level sets") {
    SECTION("constant field below threshold yields no polylines") {
        PseudospectrumField f;
        f.grid = GridSpec{-1, 1, -1, 1, 5, 5};
        f.values.assign(25, 0.1);
        f.matrix_dim = 1;
        auto cs = contours(f, {1.0});
        REQUIRE(cs.size() == 1);
        CHECK(cs[0].eps == 1.0);
        CHECK(cs[0].polylines.empty());
    }
    SECTION("unit circle from the scalar zero matrix") {
        GridSpec g{-2, 2, -2, 2, 201, 201};
        PseudospectrumField f = field(scalar_zero(), g);
        auto cs = contours(f, {1.0});
        REQUIRE(cs.size() == 1);
        REQUIRE(cs[0].polylines.size() == 1);
        const auto& poly = cs[0].polylines[0];
        REQUIRE(poly.size() >= 3);
        CHECK(poly.front() == poly.back());
        const double tol = 2.0 * g.cell_diag();
        for (const cpx& z : poly) CHECK(std::abs(std::abs(z) - 1.0) <= tol);
    }
    SECTION("finer level nests inside coarser") {
        GridSpec g{-2, 2, -2, 2, 101, 101};
        PseudospectrumField f = field(scalar_zero(), g);
        auto cs = contours(f, {1.0, 0.5});
        REQUIRE(cs.size() == 2);
        double min_outer = 1e300, max_inner = 0;
        for (const cpx& z : cs[0].polylines.at(0)) min_outer = std::min(min_outer, std::abs(z));
        for (const cpx& z : cs[1].polylines.at(0)) max_inner = std::max(max_inner, std::abs(z));
        CHECK(max_inner < min_outer);
    }
    SECTION("levels must be positive and strictly decreasing") {
        PseudospectrumField f;
        f.grid = GridSpec{-1, 1, -1, 1, 3, 3};
        f.values.assign(9, 0.1);
        f.matrix_dim = 1;
        CHECK_THROWS_AS(contours(f, {0.5, 1.0}), validation_error);
        CHECK_THROWS_AS(contours(f, {1.0, -0.5}), validation_error);
    }
    SECTION("polylines stay inside the grid rectangle") {
        GridSpec g{-1.5, 1.5, -1.5, 1.5, 41, 41};
        PseudospectrumField f = field(scalar_zero(), g);
        for (const ContourSet& cs : contours(f, {2.0, 1.0, 0.5}))
            for (const auto& poly : cs.polylines) {
                CHECK(poly.size() >= 2);
                for (const cpx& z : poly) CHECK(g.contains(z));
            }
    }
}

TEST_CASE("sublevel nesting over random matrices") {
    std::mt19937_64 rng(29);
    std::normal_distribution<double> gauss;
    for (int rep = 0; rep < 3; ++rep) {
        Eigen::MatrixXcd m(6, 6);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) m(i, j) = cpx(gauss(rng), gauss(rng));
        GridSpec g{-4, 4, -4, 4, 21, 21};
        PseudospectrumField f = field(ComplexMatrix(m), g);
        auto outer = sublevel_points(f, 1.0);
        auto inner = sublevel_points(f, 0.4);
        std::set<std::pair<long, long>> outer_keys;
        for (const cpx& z : outer)
            outer_keys.insert({std::lround(z.real() * 1e9), std::lround(z.imag() * 1e9)});
        for (const cpx& z : inner)
            CHECK(outer_keys.count({std::lround(z.real() * 1e9), std::lround(z.imag() * 1e9)}) == 1);
    }
}

TEST_CASE("eps-neighborhood of eigenvalues is flagged") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXcd m(5, 5);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) m(i, j) = cpx(gauss(rng), gauss(rng));
    ComplexMatrix cm(m);
    GridSpec g{-4, 4, -4, 4, 41, 41};
    PseudospectrumField f = field(cm, g);
    auto ev = eigenvalues(cm);
    const double eps = 0.8;
    const double h = g.cell_diag();
    auto flagged = sublevel_points(f, eps);
    std::set<std::pair<long, long>> keys;
    for (const cpx& z : flagged)
        keys.insert({std::lround(z.real() * 1e9), std::lround(z.imag() * 1e9)});
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            cpx z = g.node(i, j);
            double d = 1e300;
            for (const cpx& e : ev) d = std::min(d, std::abs(z - e));
            if (d < eps - h)
                CHECK(keys.count({std::lround(z.real() * 1e9), std::lround(z.imag() * 1e9)}) == 1);
        }
}

TEST_CASE("selfadjoint equality up to one boundary cell") {
    ComplexMatrix m = diag2(-1, 2);
    GridSpec g{-3, 4, -2, 2, 36, 21};
    PseudospectrumField f = field(m, g);
    const double eps = 0.75;
    auto flagged = sublevel_points(f, eps);
    std::set<std::pair<int, int>> fl;
    for (const cpx& z : flagged)
        fl.insert({static_cast<int>(std::lround((z.real() - g.x0) / g.dx())),
                   static_cast<int>(std::lround((z.imag() - g.y0) / g.dy()))});
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            cpx z = g.node(i, j);
            double d = std::min(std::abs(z - cpx(-1)), std::abs(z - cpx(2)));
            bool in_exact = d < eps;
            bool in_flagged = fl.count({i, j}) == 1;
            if (in_exact != in_flagged)
                CHECK(std::abs(d - eps) <= g.cell_diag()); // disagreement only near the boundary
        }
}

TEST_CASE("field invariant under permutation similarity") {
    std::mt19937_64 rng(37);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXcd m(7, 7);
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j) m(i, j) = cpx(gauss(rng), gauss(rng));
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(7);
    perm.setIdentity();
    std::shuffle(perm.indices().data(), perm.indices().data() + 7, rng);
    Eigen::MatrixXcd pm = perm * m * perm.inverse();
    GridSpec g{-3, 3, -3, 3, 11, 11};
    PseudospectrumField fa = field(ComplexMatrix(m), g);
    PseudospectrumField fb = field(ComplexMatrix(pm), g);
    for (long t = 0; t < g.node_count(); ++t) {
        if (std::isinf(fa.values[t]) || std::isinf(fb.values[t])) {
            CHECK(std::isinf(fa.values[t]) == std::isinf(fb.values[t]));
        } else {
            CHECK(std::abs(fa.values[t] - fb.values[t]) <
                  1e-10 * std::max(1.0, fa.values[t]));
        }
    }
}

TEST_CASE("field is deterministic and thread-count independent") {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXcd m(100, 100); // above the Schur-path cutoff
    for (int i = 0; i < 100; ++i)
        for (int j = 0; j < 100; ++j) m(i, j) = cpx(gauss(rng), gauss(rng)) / 10.0;
    ComplexMatrix cm(m);
    GridSpec g{-2, 2, -2, 2, 7, 7};
    PseudospectrumField f1 = field(cm, g, 1);
    PseudospectrumField f2 = field(cm, g, 4);
    for (long t = 0; t < g.node_count(); ++t) CHECK(f1.values[t] == f2.values[t]);
}
