#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cymh/connection.hpp"

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

ScalarField rand_poly(int n, std::mt19937& rng) {
    std::uniform_real_distribution<double> unif(-0.4, 0.4);
    ScalarField f = ScalarField::constant(n, unif(rng));
    for (int i = 0; i < n; ++i) {
        f = f + unif(rng) * ScalarField::coordinate(n, i);
        for (int j = i; j < n; ++j)
            f = f + unif(rng) * (ScalarField::coordinate(n, i) *
                                 ScalarField::coordinate(n, j));
    }
    return f;
}

Connection random_connection(const AlgebroidPtr& E, unsigned seed) {
    std::mt19937 rng(seed);
    int n = E->n(), r = E->r();
    std::vector<ScalarField> omega;
    omega.reserve(static_cast<size_t>(r) * r * n);
    for (size_t k = 0; k < static_cast<size_t>(r) * r * n; ++k)
        omega.push_back(rand_poly(n, rng));
    return Connection(E, std::move(omega));
}

EConnOnE random_econn(const AlgebroidPtr& E, unsigned seed) {
    std::mt19937 rng(seed);
    int n = E->n(), r = E->r();
    std::vector<ScalarField> gamma;
    gamma.reserve(static_cast<size_t>(r) * r * r);
    for (size_t k = 0; k < static_cast<size_t>(r) * r * r; ++k)
        gamma.push_back(rand_poly(n, rng));
    return EConnOnE(E, std::move(gamma));
}

// Tangent algebroid on R^2 with the connection that makes the unipotent
// frame P = [[1,0],[f,1]], f = x0^2 x1 + x1^3/3, parallel for the basic
// connection: flat basic curvature, generically curved bundle connection.
struct FlatBasicExample {
    AlgebroidPtr E;
    Connection conn;
};

FlatBasicExample flat_basic_example() {
    auto E = tangent_algebroid(2, cube(2, 1.2));
    ScalarField x0 = ScalarField::coordinate(2, 0);
    ScalarField x1 = ScalarField::coordinate(2, 1);
    ScalarField f = x0 * x0 * x1 + f_pow(x1, 3) / 3.0;
    std::vector<ScalarField> P = {ScalarField::constant(2, 1.0),
                                  ScalarField::constant(2, 0.0), f,
                                  ScalarField::constant(2, 1.0)};
    Connection conn = parallel_frame_connection(E, P);
    return {E, std::move(conn)};
}

// (econn_{e_m} t)^d_{ab} for a (0,2) E-valued tensor t.
double econn_deriv_02(const LieAlgebroid& E, const EConnOnE& G, const PQForm& t,
                      int d, int m, int a, int b, const Vec& x) {
    double acc = 0.0;
    for (int k = 0; k < E.n(); ++k)
        acc += E.rho(m, k).value(x) * t.comp(d, {}, {a, b}).diff(k).value(x);
    for (int e = 0; e < E.r(); ++e)
        acc += G.G(d, m, e).value(x) * t.comp(e, {}, {a, b}).value(x) -
               G.G(e, m, a).value(x) * t.comp(d, {}, {e, b}).value(x) -
               G.G(e, m, b).value(x) * t.comp(d, {}, {a, e}).value(x);
    return acc;
}

PQForm curvature_form(const AlgebroidPtr& E, const Connection& conn) {
    int n = E->n(), r = E->r();
    FieldTable R = curvature(conn);
    std::vector<ScalarField> comps(static_cast<size_t>(r) * n * n * r,
                                   ScalarField::constant(n, 0.0));
    for (int c = 0; c < r; ++c)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int a = 0; a < r; ++a)
                    comps[((static_cast<size_t>(c) * n + i) * n + j) * r + a] =
                        R.at({c, a, i, j});
    return PQForm(E, 2, 1, ValueKind::EValued, std::move(comps));
}

double max_form_value(const PQForm& w, const std::vector<Vec>& pts) {
    const auto& E = w.algebroid();
    double worst = 0.0;
    for (const Vec& x : pts)
        for (int v = 0; v < w.vdim(); ++v)
            for (int icode = 0; icode < ipow(E->n(), w.p()); ++icode)
                for (int acode = 0; acode < ipow(E->r(), w.q()); ++acode) {
                    std::vector<int> I(w.p()), A(w.q());
                    int ic = icode;
                    for (int t = w.p() - 1; t >= 0; --t) { I[t] = ic % E->n(); ic /= E->n(); }
                    int ac = acode;
                    for (int t = w.q() - 1; t >= 0; --t) { A[t] = ac % E->r(); ac /= E->r(); }
                    worst = std::max(worst, std::abs(w.comp(v, I, A).value(x)));
                }
    return worst;
}

}  // namespace

TEST_CASE("bundle curvature matches finite differences and is antisymmetric") {
    auto E = su2_example();
    Connection conn = random_connection(E, 7);
    FieldTable R = curvature(conn);
    auto pts = E->sample_points(13, 8);
    const double h = 1e-5;
    for (const Vec& x : pts)
        for (int b = 0; b < 3; ++b)
            for (int a = 0; a < 3; ++a)
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) {
                        double want = fd_oracle(conn.om(b, a, j), x, Vec::Unit(3, i), h) -
                                      fd_oracle(conn.om(b, a, i), x, Vec::Unit(3, j), h);
                        for (int c = 0; c < 3; ++c)
                            want += conn.om(c, a, j).value(x) * conn.om(b, c, i).value(x) -
                                    conn.om(c, a, i).value(x) * conn.om(b, c, j).value(x);
                        CHECK(std::abs(R.at({b, a, i, j}).value(x) - want) < 1e-6);
                        CHECK(std::abs(R.at({b, a, i, j}).value(x) +
                                       R.at({b, a, j, i}).value(x)) < 1e-12);
                    }
}

TEST_CASE("conjugation flips torsion and swaps the two canonical E-connections") {
    auto E = su2_example();
    Connection conn = random_connection(E, 19);
    auto pts = E->sample_points(23, 8);

    EConnOnE rho_conn = nabla_rho(conn);
    EConnOnE bas = basic_on_E(conn);

    // the basic connection is the conjugate of nabla^rho
    EConnOnE conj_rho = conjugate(rho_conn);
    for (const Vec& x : pts)
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                for (int c = 0; c < 3; ++c)
                    CHECK(std::abs(bas.G(c, a, b).value(x) -
                                   conj_rho.G(c, a, b).value(x)) < 1e-12);

    // torsions of conjugate pairs cancel, and conjugation is an involution
    EConnOnE generic = random_econn(E, 5);
    for (const EConnOnE* G : {&rho_conn, &bas, &generic}) {
        const EConnOnE& any = *G;
        PQForm t = e_torsion(any);
        PQForm tc = e_torsion(conjugate(any));
        EConnOnE twice = conjugate(conjugate(any));
        for (const Vec& x : pts)
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                    for (int c = 0; c < 3; ++c) {
                        CHECK(std::abs(t.comp(c, {}, {a, b}).value(x) +
                                       tc.comp(c, {}, {a, b}).value(x)) < 1e-12);
                        CHECK(std::abs(twice.G(c, a, b).value(x) -
                                       any.G(c, a, b).value(x)) < 1e-12);
                    }
    }
}

TEST_CASE("basic curvature contracts onto the curvatures of both basic connections") {
    for (int which = 0; which < 2; ++which) {
        AlgebroidPtr E;
        Connection conn = [&]() {
            if (which == 0) {
                E = su2_example();
                return random_connection(E, 41);
            }
            auto ex = flat_basic_example();
            E = ex.E;
            return ex.conn;
        }();
        int n = E->n(), r = E->r();
        FieldTable S = basic_curvature(conn);
        FieldTable RE = e_curvature(basic_on_E(conn));
        FieldTable RT = e_curvature_tn(basic_on_TN(conn));
        auto pts = E->sample_points(29, 8);
        for (const Vec& x : pts) {
            for (int d = 0; d < r; ++d)
                for (int c = 0; c < r; ++c)
                    for (int a = 0; a < r; ++a)
                        for (int b = 0; b < r; ++b) {
                            double res = RE.at({d, c, a, b}).value(x);
                            for (int i = 0; i < n; ++i)
                                res += E->rho(c, i).value(x) * S.at({d, a, b, i}).value(x);
                            CHECK(std::abs(res) < 1e-8);
                        }
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i)
                    for (int a = 0; a < r; ++a)
                        for (int b = 0; b < r; ++b) {
                            double res = RT.at({j, i, a, b}).value(x);
                            for (int c = 0; c < r; ++c)
                                res += E->rho(c, j).value(x) * S.at({c, a, b, i}).value(x);
                            CHECK(std::abs(res) < 1e-8);
                        }
        }
    }
}

TEST_CASE("basic curvature decomposes into torsion derivative and anchored curvature") {
    auto E = su2_example();
    Connection conn = random_connection(E, 57);
    int n = E->n(), r = E->r();
    FieldTable S = basic_curvature(conn);
    FieldTable R = curvature(conn);
    PQForm t = e_torsion(basic_on_E(conn));
    auto pts = E->sample_points(37, 8);
    for (const Vec& x : pts)
        for (int c = 0; c < r; ++c)
            for (int a = 0; a < r; ++a)
                for (int b = 0; b < r; ++b)
                    for (int i = 0; i < n; ++i) {
                        // (nabla_{d_i} t)^c_{ab}
                        double dt = t.comp(c, {}, {a, b}).diff(i).value(x);
                        for (int d = 0; d < r; ++d)
                            dt += conn.om(c, d, i).value(x) * t.comp(d, {}, {a, b}).value(x) -
                                  conn.om(d, a, i).value(x) * t.comp(c, {}, {d, b}).value(x) -
                                  conn.om(d, b, i).value(x) * t.comp(c, {}, {a, d}).value(x);
                        double res = S.at({c, a, b, i}).value(x) - dt;
                        for (int j = 0; j < n; ++j)
                            res += E->rho(a, j).value(x) * R.at({c, b, j, i}).value(x) -
                                   E->rho(b, j).value(x) * R.at({c, a, j, i}).value(x);
                        CHECK(std::abs(res) < 1e-8);
                    }
}

TEST_CASE("first Bianchi identity for E-connections") {
    auto E = su2_example();
    EConnOnE G = random_econn(E, 71);
    int r = E->r();
    FieldTable R = e_curvature(G);
    PQForm t = e_torsion(G);
    auto pts = E->sample_points(43, 8);
    for (const Vec& x : pts)
        for (int a = 0; a < r; ++a)
            for (int b = 0; b < r; ++b)
                for (int c = 0; c < r; ++c)
                    for (int d = 0; d < r; ++d) {
                        int cyc[3][3] = {{a, b, c}, {b, c, a}, {c, a, b}};
                        double lhs = 0.0, rhs = 0.0;
                        for (auto& abc : cyc) {
                            lhs += R.at({d, abc[2], abc[0], abc[1]}).value(x);
                            for (int e = 0; e < r; ++e)
                                rhs += t.comp(e, {}, {abc[0], abc[1]}).value(x) *
                                       t.comp(d, {}, {e, abc[2]}).value(x);
                            rhs += econn_deriv_02(*E, G, t, d, abc[0], abc[1], abc[2], x);
                        }
                        CHECK(std::abs(lhs - rhs) < 1e-8);
                    }
}

TEST_CASE("second Bianchi identity for E-connections") {
    auto E = su2_example();
    EConnOnE G = random_econn(E, 83);
    int n = E->n(), r = E->r();
    FieldTable R = e_curvature(G);
    auto pts = E->sample_points(47, 6);
    for (const Vec& x : pts)
        for (int a = 0; a < r; ++a)
            for (int b = 0; b < r; ++b)
                for (int c = 0; c < r; ++c)
                    for (int d = 0; d < r; ++d)
                        for (int e = 0; e < r; ++e) {
                            int cyc[3][3] = {{a, b, c}, {b, c, a}, {c, a, b}};
                            double res = 0.0;
                            for (auto& abc : cyc) {
                                int m = abc[0], s = abc[1], u = abc[2];
                                // (econn_{e_m} R(e_s, e_u))^d_e
                                for (int k = 0; k < n; ++k)
                                    res += E->rho(m, k).value(x) *
                                           R.at({d, e, s, u}).diff(k).value(x);
                                for (int f = 0; f < r; ++f)
                                    res += G.G(d, m, f).value(x) * R.at({f, e, s, u}).value(x) -
                                           R.at({d, f, s, u}).value(x) * G.G(f, m, e).value(x) -
                                           E->C(m, s, f).value(x) * R.at({d, e, f, u}).value(x);
                            }
                            CHECK(std::abs(res) < 1e-8);
                        }
}

TEST_CASE("derivative of anchored pullbacks matches the mixed exterior derivative") {
    auto E = su2_example();
    Connection conn = random_connection(E, 97);
    int n = E->n(), r = E->r();
    std::mt19937 rng(101);

    // random E-valued 2-form on the base
    std::vector<ScalarField> wc(static_cast<size_t>(r) * n * n,
                                ScalarField::constant(n, 0.0));
    for (int c = 0; c < r; ++c)
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                ScalarField f = rand_poly(n, rng);
                wc[(static_cast<size_t>(c) * n + i) * n + j] = f;
                wc[(static_cast<size_t>(c) * n + j) * n + i] = -f;
            }
    PQForm w(E, 2, 0, ValueKind::EValued, std::move(wc));
    PQForm dw = d_basic(w, conn);
    EConnOnE Gb = basic_on_E(conn);

    // Theta^c_{a1 a2} = w^c_{ij} rho^i_{a1} rho^j_{a2}
    FieldTable Theta({r, r, r}, n);
    for (int c = 0; c < r; ++c)
        for (int a1 = 0; a1 < r; ++a1)
            for (int a2 = 0; a2 < r; ++a2) {
                ScalarField acc = ScalarField::constant(n, 0.0);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        acc = acc + w.comp(c, {i, j}, {}) * E->rho(a1, i) * E->rho(a2, j);
                Theta.at({c, a1, a2}) = acc;
            }

    auto pts = E->sample_points(53, 8);
    for (const Vec& x : pts)
        for (int c = 0; c < r; ++c)
            for (int m = 0; m < r; ++m)
                for (int a1 = 0; a1 < r; ++a1)
                    for (int a2 = 0; a2 < r; ++a2) {
                        double lhs = 0.0;
                        for (int k = 0; k < n; ++k)
                            lhs += E->rho(m, k).value(x) *
                                   Theta.at({c, a1, a2}).diff(k).value(x);
                        for (int d = 0; d < r; ++d)
                            lhs += Gb.G(c, m, d).value(x) * Theta.at({d, a1, a2}).value(x) -
                                   Gb.G(d, m, a1).value(x) * Theta.at({c, d, a2}).value(x) -
                                   Gb.G(d, m, a2).value(x) * Theta.at({c, a1, d}).value(x);
                        double rhs = 0.0;
                        for (int i = 0; i < n; ++i)
                            for (int j = 0; j < n; ++j)
                                rhs += dw.comp(c, {i, j}, {m}).value(x) *
                                       E->rho(a1, i).value(x) * E->rho(a2, j).value(x);
                        CHECK(std::abs(lhs - rhs) < 1e-8);
                    }
}

TEST_CASE("unit endomorphism: exterior derivatives recover torsion and curvature") {
    auto E = su2_example();
    Connection conn = random_connection(E, 113);
    int n = E->n(), r = E->r();

    std::vector<ScalarField> unit(static_cast<size_t>(r) * r,
                                  ScalarField::constant(n, 0.0));
    for (int c = 0; c < r; ++c)
        unit[static_cast<size_t>(c) * r + c] = ScalarField::constant(n, 1.0);
    PQForm one(E, 0, 1, ValueKind::EValued, std::move(unit));

    auto pts = E->sample_points(59, 8);

    PQForm dn = d_nabla(one, conn);
    for (const Vec& x : pts)
        for (int c = 0; c < r; ++c)
            for (int i = 0; i < n; ++i)
                for (int a = 0; a < r; ++a)
                    CHECK(std::abs(dn.comp(c, {i}, {a}).value(x)) < 1e-14);

    PQForm db = d_basic(one, conn);
    PQForm t = e_torsion(basic_on_E(conn));
    for (const Vec& x : pts)
        for (int c = 0; c < r; ++c)
            for (int a = 0; a < r; ++a)
                for (int b = 0; b < r; ++b)
                    CHECK(std::abs(db.comp(c, {}, {a, b}).value(x) -
                                   t.comp(c, {}, {a, b}).value(x)) < 1e-12);

    // the two derivatives commute up to contracted basic and bundle curvature
    PQForm ddb = d_nabla(db, conn);
    FieldTable R = curvature(conn);
    FieldTable S = basic_curvature(conn);
    for (const Vec& x : pts)
        for (int c = 0; c < r; ++c)
            for (int i = 0; i < n; ++i)
                for (int a0 = 0; a0 < r; ++a0)
                    for (int a1 = 0; a1 < r; ++a1) {
                        double want = S.at({c, a0, a1, i}).value(x);
                        for (int j = 0; j < n; ++j)
                            want += E->rho(a1, j).value(x) * R.at({c, a0, i, j}).value(x) -
                                    E->rho(a0, j).value(x) * R.at({c, a1, i, j}).value(x);
                        CHECK(std::abs(ddb.comp(c, {i}, {a0, a1}).value(x) - want) < 1e-8);
                    }
}

TEST_CASE("parallel frame: flat basic geometry, curved bundle connection") {
    auto ex = flat_basic_example();
    const auto& E = ex.E;
    const auto& conn = ex.conn;
    auto pts = E->sample_points(61, 10);

    // basic curvature vanishes, bundle curvature does not
    FieldTable S = basic_curvature(conn);
    FieldTable R = curvature(conn);
    double worst_S = 0.0, worst_R = 0.0;
    for (const Vec& x : pts)
        for (int c = 0; c < 2; ++c)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    worst_S = std::max(worst_S, std::abs(S.at({c, a, b, 0}).value(x)));
                    worst_S = std::max(worst_S, std::abs(S.at({c, a, b, 1}).value(x)));
                    worst_R = std::max(worst_R, std::abs(R.at({c, a, b, 1 - b}).value(x)));
                }
    CHECK(worst_S < 1e-10);
    CHECK(worst_R > 0.1);

    // with flat basic curvature, the anchored curvature is the basic-covariant
    // derivative of the basic torsion
    FieldTable Rr = e_curvature(nabla_rho(conn));
    EConnOnE Gb = basic_on_E(conn);
    PQForm t = e_torsion(Gb);
    for (const Vec& x : pts)
        for (int d = 0; d < 2; ++d)
            for (int c = 0; c < 2; ++c)
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b)
                        CHECK(std::abs(Rr.at({d, c, a, b}).value(x) -
                                       econn_deriv_02(*E, Gb, t, d, c, a, b, x)) < 1e-8);

    // the curvature 2-form is closed for the mixed exterior derivative
    PQForm closed = d_basic(curvature_form(E, conn), conn);
    CHECK(max_form_value(closed, pts) < 1e-7);

    // ... which fails without flat basic curvature
    auto E2 = su2_example();
    Connection generic = random_connection(E2, 127);
    PQForm open = d_basic(curvature_form(E2, generic), generic);
    CHECK(max_form_value(open, E2->sample_points(67, 6)) > 1e-3);
}

TEST_CASE("lie algebra bundle: basic torsion is the fibre bracket") {
    int n = 2, r = 3;
    ScalarField zero = ScalarField::constant(n, 0.0);
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
    Connection conn = random_connection(K, 131);
    PQForm t = e_torsion(basic_on_E(conn));
    auto pts = K->sample_points(71, 8);
    for (const Vec& x : pts)
        for (int a = 0; a < r; ++a)
            for (int b = 0; b < r; ++b)
                for (int c = 0; c < r; ++c)
                    CHECK(std::abs(t.comp(c, {}, {a, b}).value(x) -
                                   K->C(a, b, c).value(x)) < 1e-12);
}

TEST_CASE("mixed forms validate antisymmetry and argument shapes") {
    auto E = su2_example();
    auto pts = E->sample_points(73, 4);
    int n = E->n(), r = E->r();

    std::vector<ScalarField> good(static_cast<size_t>(n) * n,
                                  ScalarField::constant(n, 0.0));
    good[0 * n + 1] = ScalarField::coordinate(n, 2);
    good[1 * n + 0] = -ScalarField::coordinate(n, 2);
    CHECK_NOTHROW(PQForm::checked(E, 2, 0, ValueKind::Scalar, good, pts));

    auto bad = good;
    bad[1 * n + 0] = ScalarField::coordinate(n, 2);
    CHECK_THROWS_AS(PQForm::checked(E, 2, 0, ValueKind::Scalar, bad, pts), UsageError);

    CHECK_THROWS_AS(PQForm::zero(E, 5, 0, ValueKind::Scalar), UsageError);
    PQForm tn = PQForm::zero(E, 0, 1, ValueKind::TNValued);
    Connection conn = Connection::flat(E);
    CHECK_THROWS_AS(d_nabla(tn, conn), UsageError);
    CHECK_THROWS_AS(d_basic(PQForm::zero(E, 0, 1, ValueKind::Scalar), conn), UsageError);
    CHECK_THROWS_AS(
        PQForm::zero(E, 0, 1, ValueKind::EValued).comp(0, {0}, {0}), UsageError);
}
