#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cymh/algebroid.hpp"

#include <cmath>
#include <random>

using namespace cymh;

namespace {

Box cube(int n, double half) {
    Box b;
    b.lo = Vec::Constant(n, -half);
    b.hi = Vec::Constant(n, half);
    return b;
}

Vec cross(const Vec& a, const Vec& b) {
    Vec c(3);
    c << a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0];
    return c;
}

Section const_section(const LieAlgebroid& E, const Vec& u) {
    Section s;
    for (int a = 0; a < E.r(); ++a) s.comp.push_back(ScalarField::constant(E.n(), u[a]));
    return s;
}

}  // namespace

TEST_CASE("su(2) example: bracket is the cross product, anchor the rotation field") {
    auto E = su2_example();
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int rep = 0; rep < 25; ++rep) {
        Vec u(3), v(3), x(3);
        for (int i = 0; i < 3; ++i) { u[i] = unif(rng); v[i] = unif(rng); x[i] = unif(rng); }
        Section su = const_section(*E, u), sv = const_section(*E, v);
        Section br = bracket(*E, su, sv);
        Vec want = cross(u, v);
        for (int c = 0; c < 3; ++c)
            CHECK(std::abs(br.comp[c].value(x) - want[c]) < 1e-13);
        // anchor of e_j at x is -(e_j x x)
        for (int j = 0; j < 3; ++j) {
            Vec rho_j(3);
            for (int i = 0; i < 3; ++i) rho_j[i] = E->rho(j, i).value(x);
            Vec want_rho = -cross(Vec::Unit(3, j), x);
            CHECK((rho_j - want_rho).cwiseAbs().maxCoeff() < 1e-14);
        }
    }
}

TEST_CASE("axiom suite passes on the stock examples") {
    for (auto& E : {su2_example(), electroweak_example(0.7, 0.4, 2.0),
                    tangent_algebroid(3, cube(3, 2.0))}) {
        AxiomReport rep = check_axioms(*E, 5, 10, 3);
        CHECK(rep.pass);
        CHECK(rep.antisymmetry < 1e-12);
        CHECK(rep.anchor_homomorphism < 1e-9);
        CHECK(rep.jacobiator < 1e-8);
    }
}

TEST_CASE("bracket derivative terms agree with a finite-difference oracle") {
    auto E = su2_example();
    std::mt19937 rng(23);
    Section mu = E->random_section(rng);
    Section nu = E->random_section(rng);
    Section br = bracket(*E, mu, nu);
    auto pts = E->sample_points(31, 10);
    const double h = 1e-6;
    for (const Vec& x : pts) {
        for (int c = 0; c < 3; ++c) {
            // independent evaluation: structure term plus FD derivative terms
            double want = 0.0;
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                    want += mu.comp[a].value(x) * nu.comp[b].value(x) * E->C(a, b, c).value(x);
            for (int a = 0; a < 3; ++a)
                for (int i = 0; i < 3; ++i) {
                    Vec xp = x, xm = x;
                    xp[i] += h;
                    xm[i] -= h;
                    double dnu = (nu.comp[c].value(xp) - nu.comp[c].value(xm)) / (2 * h);
                    double dmu = (mu.comp[c].value(xp) - mu.comp[c].value(xm)) / (2 * h);
                    want += E->rho(a, i).value(x) *
                            (mu.comp[a].value(x) * dnu - nu.comp[a].value(x) * dmu);
                }
            CHECK(std::abs(br.comp[c].value(x) - want) < 1e-8);
        }
    }
}

TEST_CASE("corrupted structure constants are rejected") {
    // su(2) constants with one entry flipped: anchor is no longer a morphism
    int n = 3, r = 3;
    auto good = su2_example();
    std::vector<ScalarField> anchor;
    for (int a = 0; a < r; ++a)
        for (int i = 0; i < n; ++i) anchor.push_back(good->rho(a, i));
    std::vector<double> structure(27, 0.0);
    auto eps = [](int i, int j, int k) {
        return static_cast<double>((i - j) * (j - k) * (k - i)) / 2.0;
    };
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c) structure[cidx(r, a, b, c)] = eps(a, b, c);
    structure[cidx(r, 0, 1, 2)] = -1.0;  // corrupt
    CHECK_THROWS_AS(
        action_algebroid(n, r, structure, anchor, cube(3, 1.5), "bad"),
        UsageError);
}

TEST_CASE("lie algebra bundles validate the fibrewise Jacobi identity") {
    int n = 2, r = 3;
    ScalarField zero = ScalarField::constant(n, 0.0);
    // su(2) scaled by a positive function of the base point: still Jacobi
    ScalarField s = 1.0 + f_pow(ScalarField::coordinate(n, 0), 2);
    std::vector<ScalarField> structure(static_cast<size_t>(r) * r * r, zero);
    auto eps = [](int i, int j, int k) {
        return static_cast<double>((i - j) * (j - k) * (k - i)) / 2.0;
    };
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c)
                if (eps(a, b, c) != 0.0)
                    structure[cidx(r, a, b, c)] = eps(a, b, c) * s;
    auto K = lab(n, r, structure, cube(2, 1.0), "scaled-su2");
    CHECK(check_axioms(*K, 3, 8, 3).pass);

    // breaking antisymmetry must throw
    auto bad = structure;
    bad[cidx(r, 1, 1, 0)] = ScalarField::constant(n, 0.3);
    CHECK_THROWS_AS(lab(n, r, bad, cube(2, 1.0), "bad"), UsageError);
}

TEST_CASE("direct products bracket blockwise and satisfy the axioms") {
    auto E1 = su2_example();
    auto E2 = tangent_algebroid(2, cube(2, 1.0));
    auto P = direct_product(E1, E2);
    CHECK(P->n() == 5);
    CHECK(P->r() == 5);
    CHECK(check_axioms(*P, 9, 8, 3).pass);

    // bracket of lifted frame sections matches the factor brackets
    std::mt19937 rng(4);
    auto pts = P->sample_points(17, 6);
    Section f0 = P->frame_section(0), f1 = P->frame_section(1);
    Section br = bracket(*P, f0, f1);
    for (const Vec& x : pts) {
        CHECK(std::abs(br.comp[2].value(x) - 1.0) < 1e-14);  // e1 x e2 = e3 block
        CHECK(std::abs(br.comp[3].value(x)) < 1e-14);
        CHECK(std::abs(br.comp[4].value(x)) < 1e-14);
    }
    // cross-factor brackets vanish
    Section g = bracket(*P, f0, P->frame_section(4));
    for (const Vec& x : pts)
        for (int c = 0; c < 5; ++c) CHECK(std::abs(g.comp[c].value(x)) < 1e-14);
}

TEST_CASE("domain is enforced") {
    auto E = su2_example();
    Vec outside = Vec::Constant(3, 9.0);
    Section mu = E->frame_section(0), nu = E->frame_section(1);
    CHECK_THROWS_AS(anchor_curvature(*E, mu, nu, outside), DomainError);
    CHECK_THROWS_AS(jacobiator(*E, mu, nu, mu, outside), DomainError);
}
