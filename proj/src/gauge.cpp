#include "cymh/gauge.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace cymh {

namespace {

double max_abs_at(const std::vector<ScalarField>& fields, const std::vector<Vec>& pts) {
    double worst = 0.0;
    for (const Vec& x : pts)
        for (const auto& f : fields) worst = std::max(worst, std::abs(f.value(x)));
    return worst;
}

ScalarField zero_field(int n) { return ScalarField::constant(n, 0.0); }

}  // namespace

Metric make_metric(const AlgebroidPtr& E, std::vector<ScalarField> kappa,
                   std::vector<ScalarField> g, const std::vector<Vec>& pts) {
    int n = E->n(), r = E->r();
    if (kappa.size() != static_cast<size_t>(r) * r || g.size() != static_cast<size_t>(n) * n)
        throw UsageError("make_metric: coefficient tables have wrong size");
    Metric m{std::move(kappa), std::move(g)};
    for (const Vec& x : pts) {
        Mat K(r, r), G(n, n);
        for (int a = 0; a < r; ++a)
            for (int b = 0; b < r; ++b) K(a, b) = m.k(r, a, b).value(x);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) G(i, j) = m.gm(n, i, j).value(x);
        if ((K - K.transpose()).cwiseAbs().maxCoeff() > 1e-12 ||
            (G - G.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            throw UsageError("make_metric: metric not symmetric");
        if (Eigen::LLT<Mat>(K).info() != Eigen::Success ||
            Eigen::LLT<Mat>(G).info() != Eigen::Success)
            throw UsageError("make_metric: metric not positive definite");
    }
    return m;
}

Metric euclidean_metric(const AlgebroidPtr& E) {
    int n = E->n(), r = E->r();
    Metric m;
    m.kappa.assign(static_cast<size_t>(r) * r, zero_field(n));
    m.g.assign(static_cast<size_t>(n) * n, zero_field(n));
    for (int a = 0; a < r; ++a) m.kappa[a * r + a] = ScalarField::constant(n, 1.0);
    for (int i = 0; i < n; ++i) m.g[i * n + i] = ScalarField::constant(n, 1.0);
    return m;
}

CompatReport compat_report(const GaugeData& data, const std::vector<Vec>& pts,
                           double tol) {
    const auto& E = data.E;
    int n = E->n(), r = E->r();
    CompatReport rep;
    rep.tol = tol;

    FieldTable R = curvature(data.conn);
    PQForm dz = d_basic(data.zeta, data.conn);
    std::vector<ScalarField> res1;
    for (int c = 0; c < r; ++c)
        for (int a = 0; a < r; ++a)
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    res1.push_back(R.at({c, a, i, j}) + dz.comp(c, {i, j}, {a}));
    rep.curvature_vs_zeta = max_abs_at(res1, pts);

    FieldTable S = basic_curvature(data.conn);
    std::vector<ScalarField> res2;
    for (int c = 0; c < r; ++c)
        for (int a = 0; a < r; ++a)
            for (int b = 0; b < r; ++b)
                for (int i = 0; i < n; ++i) res2.push_back(S.at({c, a, b, i}));
    rep.basic_curvature = max_abs_at(res2, pts);

    EConnOnE Gb = basic_on_E(data.conn);
    EConnOnTN Bb = basic_on_TN(data.conn);
    std::vector<ScalarField> res3, res4;
    for (int a = 0; a < r; ++a) {
        for (int b = 0; b < r; ++b)
            for (int c = b; c < r; ++c) {
                ScalarField acc = zero_field(n);
                for (int k = 0; k < n; ++k)
                    acc = acc + E->rho(a, k) * data.metric.k(r, b, c).diff(k);
                for (int d = 0; d < r; ++d)
                    acc = acc - Gb.G(d, a, b) * data.metric.k(r, d, c) -
                          Gb.G(d, a, c) * data.metric.k(r, b, d);
                res3.push_back(acc);
            }
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                ScalarField acc = zero_field(n);
                for (int k = 0; k < n; ++k)
                    acc = acc + E->rho(a, k) * data.metric.gm(n, i, j).diff(k) -
                          Bb.B(k, a, i) * data.metric.gm(n, k, j) -
                          Bb.B(k, a, j) * data.metric.gm(n, i, k);
                res4.push_back(acc);
            }
    }
    rep.kappa_parallel = max_abs_at(res3, pts);
    rep.g_parallel = max_abs_at(res4, pts);

    rep.pass = rep.curvature_vs_zeta < tol && rep.basic_curvature < tol &&
               rep.kappa_parallel < tol && rep.g_parallel < tol;
    return rep;
}

GaugeData checked_gauge_data(GaugeData data, const std::vector<Vec>& pts, double tol) {
    CompatReport rep = compat_report(data, pts, tol);
    if (!rep.pass)
        throw UsageError("gauge data fails compatibility: residuals " +
                         std::to_string(rep.curvature_vs_zeta) + ", " +
                         std::to_string(rep.basic_curvature) + ", " +
                         std::to_string(rep.kappa_parallel) + ", " +
                         std::to_string(rep.g_parallel));
    return data;
}

Redef make_redef(const AlgebroidPtr& E, std::vector<ScalarField> lambda) {
    return Redef{PQForm(E, 1, 0, ValueKind::EValued, std::move(lambda))};
}

Redef zero_redef(const AlgebroidPtr& E) {
    return make_redef(E, std::vector<ScalarField>(
                             static_cast<size_t>(E->r()) * E->n(), zero_field(E->n())));
}

Redef random_redef(const AlgebroidPtr& E, unsigned seed, double scale) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> unif(-scale, scale);
    int n = E->n();
    std::vector<ScalarField> lambda;
    lambda.reserve(static_cast<size_t>(E->r()) * n);
    for (int a = 0; a < E->r(); ++a)
        for (int i = 0; i < n; ++i) {
            ScalarField f = ScalarField::constant(n, unif(rng));
            for (int k = 0; k < n; ++k)
                f = f + unif(rng) * ScalarField::coordinate(n, k);
            lambda.push_back(f);
        }
    return make_redef(E, std::move(lambda));
}

LambdaOperators lambda_operators(const LieAlgebroid& E, const Redef& rd, const Vec& x) {
    if (!E.domain().contains(x)) throw DomainError("lambda_operators: point outside domain");
    int n = E.n(), r = E.r();
    LambdaOperators out;
    out.L = Mat::Identity(r, r);
    out.Lhat = Mat::Identity(n, n);
    Mat lam(r, n), rho(n, r);
    for (int a = 0; a < r; ++a)
        for (int i = 0; i < n; ++i) {
            lam(a, i) = rd.l(a, i).value(x);
            rho(i, a) = E.rho(a, i).value(x);
        }
    out.L -= lam * rho;
    out.Lhat -= rho * lam;
    Eigen::PartialPivLU<Mat> lu(out.L);
    if (std::abs(lu.determinant()) < 1e-9)
        throw SingularSystemError("lambda_operators: Lambda is singular");
    out.Linv = lu.inverse();
    out.Lhatinv = Eigen::PartialPivLU<Mat>(out.Lhat).inverse();
    return out;
}

LambdaFields lambda_fields(const AlgebroidPtr& E, const Redef& rd) {
    int n = E->n(), r = E->r();
    LambdaFields out;
    out.L.assign(static_cast<size_t>(r) * r, zero_field(n));
    out.Lhat.assign(static_cast<size_t>(n) * n, zero_field(n));
    for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) {
            ScalarField acc = ScalarField::constant(n, a == b ? 1.0 : 0.0);
            for (int k = 0; k < n; ++k) acc = acc - rd.l(a, k) * E->rho(b, k);
            out.L[static_cast<size_t>(a) * r + b] = acc;
        }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            ScalarField acc = ScalarField::constant(n, i == j ? 1.0 : 0.0);
            for (int b = 0; b < r; ++b) acc = acc - E->rho(b, i) * rd.l(b, j);
            out.Lhat[static_cast<size_t>(i) * n + j] = acc;
        }
    out.Linv = matrix_inverse_fields(out.L, r);
    out.Lhatinv = matrix_inverse_fields(out.Lhat, n);
    return out;
}

Connection redefine_connection(const Connection& conn, const Redef& rd) {
    const auto& E = conn.algebroid();
    int n = E->n(), r = E->r();
    LambdaFields lf = lambda_fields(E, rd);

    // tau = Linv lambda
    std::vector<ScalarField> tau(static_cast<size_t>(r) * n, zero_field(n));
    for (int c = 0; c < r; ++c)
        for (int i = 0; i < n; ++i) {
            ScalarField acc = zero_field(n);
            for (int b = 0; b < r; ++b)
                acc = acc + lf.Linv[static_cast<size_t>(c) * r + b] * rd.l(b, i);
            tau[static_cast<size_t>(c) * n + i] = acc;
        }

    std::vector<ScalarField> omega(static_cast<size_t>(r) * r * n, zero_field(n));
    for (int a = 0; a < r; ++a)
        for (int i = 0; i < n; ++i) {
            // inner^c = Lhatinv^j_i omega^c_aj - tau^d_i C^c_da + rho^j_a d_j tau^c_i
            std::vector<ScalarField> inner(r, zero_field(n));
            for (int c = 0; c < r; ++c) {
                ScalarField acc = zero_field(n);
                for (int j = 0; j < n; ++j)
                    acc = acc + lf.Lhatinv[static_cast<size_t>(j) * n + i] * conn.om(c, a, j) +
                          E->rho(a, j) * tau[static_cast<size_t>(c) * n + i].diff(j);
                for (int d = 0; d < r; ++d)
                    acc = acc - tau[static_cast<size_t>(d) * n + i] * E->C(d, a, c);
                inner[c] = acc;
            }
            for (int b = 0; b < r; ++b) {
                ScalarField acc = zero_field(n);
                for (int c = 0; c < r; ++c)
                    acc = acc + lf.L[static_cast<size_t>(b) * r + c] * inner[c];
                for (int j = 0; j < n; ++j)
                    acc = acc + E->rho(a, j).diff(i) * rd.l(b, j);
                omega[(static_cast<size_t>(a) * n + i) * r + b] = acc;
            }
        }
    return Connection(E, std::move(omega));
}

Metric redefine_metrics(const Metric& m, const AlgebroidPtr& E, const Redef& rd) {
    int n = E->n(), r = E->r();
    LambdaFields lf = lambda_fields(E, rd);
    Metric out;
    out.kappa.assign(static_cast<size_t>(r) * r, zero_field(n));
    out.g.assign(static_cast<size_t>(n) * n, zero_field(n));
    for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) {
            ScalarField acc = zero_field(n);
            for (int c = 0; c < r; ++c)
                for (int d = 0; d < r; ++d)
                    acc = acc + m.k(r, c, d) * lf.Linv[static_cast<size_t>(c) * r + a] *
                              lf.Linv[static_cast<size_t>(d) * r + b];
            out.kappa[static_cast<size_t>(a) * r + b] = acc;
        }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            ScalarField acc = zero_field(n);
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    acc = acc + m.gm(n, k, l) * lf.Lhatinv[static_cast<size_t>(k) * n + i] *
                              lf.Lhatinv[static_cast<size_t>(l) * n + j];
            out.g[static_cast<size_t>(i) * n + j] = acc;
        }
    return out;
}

PQForm zeta_hat(const Connection& conn, const Redef& rd) {
    const auto& E = conn.algebroid();
    int n = E->n(), r = E->r();
    LambdaFields lf = lambda_fields(E, rd);
    PQForm dl = d_nabla(rd.lambda, conn);
    EConnOnTN Bb = basic_on_TN(conn);

    // W^a_kl: the right-hand side evaluated on coordinate fields
    std::vector<ScalarField> W(static_cast<size_t>(r) * n * n, zero_field(n));
    for (int a = 0; a < r; ++a)
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) {
                ScalarField acc = dl.comp(a, {k, l}, {});
                for (int b = 0; b < r; ++b) {
                    for (int m = 0; m < n; ++m)
                        acc = acc + rd.l(a, m) *
                                  (rd.l(b, k) * Bb.B(m, b, l) - rd.l(b, l) * Bb.B(m, b, k));
                    for (int c = 0; c < r; ++c)
                        acc = acc - rd.l(b, k) * rd.l(c, l) * E->C(b, c, a);
                    for (int m = 0; m < n; ++m)
                        acc = acc - E->rho(b, m) * (rd.l(b, k) * rd.l(a, l).diff(m) -
                                                    rd.l(b, l) * rd.l(a, k).diff(m));
                }
                W[(static_cast<size_t>(a) * n + k) * n + l] = acc;
            }

    std::vector<ScalarField> comps(static_cast<size_t>(r) * n * n, zero_field(n));
    for (int a = 0; a < r; ++a)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                ScalarField acc = zero_field(n);
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l)
                        acc = acc - W[(static_cast<size_t>(a) * n + k) * n + l] *
                                  lf.Lhatinv[static_cast<size_t>(k) * n + i] *
                                  lf.Lhatinv[static_cast<size_t>(l) * n + j];
                comps[(static_cast<size_t>(a) * n + i) * n + j] = acc;
            }
    return PQForm(E, 2, 0, ValueKind::EValued, std::move(comps));
}

PQForm redefine_zeta(const GaugeData& data, const Redef& rd) {
    const auto& E = data.E;
    int n = E->n(), r = E->r();
    LambdaFields lf = lambda_fields(E, rd);
    PQForm zh = zeta_hat(data.conn, rd);
    std::vector<ScalarField> comps(static_cast<size_t>(r) * n * n, zero_field(n));
    for (int a = 0; a < r; ++a)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                ScalarField acc = zh.comp(a, {i, j}, {});
                for (int b = 0; b < r; ++b)
                    for (int k = 0; k < n; ++k)
                        for (int l = 0; l < n; ++l)
                            acc = acc + lf.L[static_cast<size_t>(a) * r + b] *
                                      data.zeta.comp(b, {k, l}, {}) *
                                      lf.Lhatinv[static_cast<size_t>(k) * n + i] *
                                      lf.Lhatinv[static_cast<size_t>(l) * n + j];
                comps[(static_cast<size_t>(a) * n + i) * n + j] = acc;
            }
    return PQForm(E, 2, 0, ValueKind::EValued, std::move(comps));
}

GaugeData redefine(const GaugeData& data, const Redef& rd) {
    return GaugeData{data.E, redefine_connection(data.conn, rd),
                     redefine_zeta(data, rd), redefine_metrics(data.metric, data.E, rd)};
}

namespace {

std::vector<ScalarField> group_copy(const std::vector<ScalarField>& src) {
    int dim = src[0].dim();
    auto shared = std::make_shared<std::vector<ScalarField>>(src);
    return make_field_group(dim, static_cast<int>(src.size()),
                            [shared](const Vec& x) {
                                std::vector<Jet2> out;
                                out.reserve(shared->size());
                                for (const auto& f : *shared) out.push_back(f.jet(x));
                                return out;
                            });
}

}  // namespace

GaugeData compactify(const GaugeData& data) {
    const auto& E = data.E;
    int n = E->n(), r = E->r();

    std::vector<ScalarField> omega(static_cast<size_t>(r) * n * r);
    for (int a = 0; a < r; ++a)
        for (int i = 0; i < n; ++i)
            for (int b = 0; b < r; ++b)
                omega[(static_cast<size_t>(a) * n + i) * r + b] = data.conn.om(b, a, i);

    std::vector<ScalarField> zc(static_cast<size_t>(r) * n * n);
    for (int c = 0; c < r; ++c)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                zc[(static_cast<size_t>(c) * n + i) * n + j] =
                    data.zeta.comp(c, {i, j}, {});

    Metric metric;
    metric.kappa = group_copy(data.metric.kappa);
    metric.g = group_copy(data.metric.g);
    return GaugeData{E, Connection(E, group_copy(omega)),
                     PQForm(E, 2, 0, ValueKind::EValued, group_copy(zc)), metric};
}

Redef compose_lambda(const AlgebroidPtr& E, const Redef& first, const Redef& second) {
    int n = E->n(), r = E->r();
    std::vector<ScalarField> lambda(static_cast<size_t>(r) * n, zero_field(n));
    for (int a = 0; a < r; ++a)
        for (int i = 0; i < n; ++i) {
            ScalarField acc = first.l(a, i) + second.l(a, i);
            for (int k = 0; k < n; ++k)
                for (int b = 0; b < r; ++b)
                    acc = acc - second.l(a, k) * E->rho(b, k) * first.l(b, i);
            lambda[static_cast<size_t>(a) * n + i] = acc;
        }
    return make_redef(E, std::move(lambda));
}

Redef inverse_lambda(const AlgebroidPtr& E, const Redef& rd) {
    int n = E->n(), r = E->r();
    LambdaFields lf = lambda_fields(E, rd);
    std::vector<ScalarField> lambda(static_cast<size_t>(r) * n, zero_field(n));
    for (int a = 0; a < r; ++a)
        for (int i = 0; i < n; ++i) {
            ScalarField acc = zero_field(n);
            for (int b = 0; b < r; ++b)
                acc = acc - lf.Linv[static_cast<size_t>(a) * r + b] * rd.l(b, i);
            lambda[static_cast<size_t>(a) * n + i] = acc;
        }
    return make_redef(E, std::move(lambda));
}

CurvatureShiftReport curvature_shift(const Connection& conn,
                                     const std::vector<ScalarField>& I,
                                     const std::vector<Vec>& pts) {
    const auto& E = conn.algebroid();
    int n = E->n(), r = E->r();
    if (I.size() != static_cast<size_t>(r) * r * n)
        throw UsageError("curvature_shift: endomorphism table has wrong size");
    auto Iat = [&](int b, int a, int i) -> const ScalarField& {
        return I[(static_cast<size_t>(a) * n + i) * r + b];
    };

    std::vector<ScalarField> shifted(I.size(), zero_field(n));
    for (int a = 0; a < r; ++a)
        for (int i = 0; i < n; ++i)
            for (int b = 0; b < r; ++b)
                shifted[(static_cast<size_t>(a) * n + i) * r + b] =
                    conn.om(b, a, i) + Iat(b, a, i);
    Connection connp(E, std::move(shifted));

    CurvatureShiftReport rep;

    FieldTable R = curvature(conn), Rp = curvature(connp);
    std::vector<ScalarField> res1;
    for (int b = 0; b < r; ++b)
        for (int a = 0; a < r; ++a)
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    // d^nabla I + I ^ I on (d_i, d_j)
                    ScalarField acc = Iat(b, a, j).diff(i) - Iat(b, a, i).diff(j);
                    for (int c = 0; c < r; ++c)
                        acc = acc + conn.om(b, c, i) * Iat(c, a, j) -
                              Iat(b, c, j) * conn.om(c, a, i) -
                              conn.om(b, c, j) * Iat(c, a, i) +
                              Iat(b, c, i) * conn.om(c, a, j) +
                              Iat(b, c, i) * Iat(c, a, j) - Iat(b, c, j) * Iat(c, a, i);
                    res1.push_back(Rp.at({b, a, i, j}) - R.at({b, a, i, j}) - acc);
                }
    rep.bundle_residual = max_abs_at(res1, pts);

    FieldTable S = basic_curvature(conn), Sp = basic_curvature(connp);
    std::vector<ScalarField> icomps(I.size(), zero_field(n));
    for (int b = 0; b < r; ++b)
        for (int i = 0; i < n; ++i)
            for (int a = 0; a < r; ++a)
                icomps[(static_cast<size_t>(b) * n + i) * r + a] = Iat(b, a, i);
    PQForm iform(E, 1, 1, ValueKind::EValued, std::move(icomps));
    PQForm di = d_basic(iform, conn);
    std::vector<ScalarField> res2;
    for (int c = 0; c < r; ++c)
        for (int a = 0; a < r; ++a)
            for (int b = 0; b < r; ++b)
                for (int i = 0; i < n; ++i) {
                    ScalarField wedge = zero_field(n);
                    for (int k = 0; k < n; ++k)
                        for (int d = 0; d < r; ++d)
                            wedge = wedge + Iat(c, a, k) * E->rho(d, k) * Iat(d, b, i) -
                                    Iat(c, b, k) * E->rho(d, k) * Iat(d, a, i);
                    res2.push_back(Sp.at({c, a, b, i}) - S.at({c, a, b, i}) +
                                   di.comp(c, {i}, {a, b}) + wedge);
                }
    rep.basic_residual = max_abs_at(res2, pts);
    return rep;
}

ObstructionReport obstruction_rep(const GaugeData& data, const std::vector<Vec>& pts) {
    const auto& E = data.E;
    int n = E->n(), r = E->r();
    for (const Vec& x : pts)
        for (int a = 0; a < r; ++a)
            for (int i = 0; i < n; ++i)
                if (std::abs(E->rho(a, i).value(x)) > 1e-14)
                    throw UsageError("obstruction_rep: algebroid has nonzero anchor");

    PQForm rep = d_nabla(data.zeta, data.conn);
    ObstructionReport out{rep, 0.0, 0.0, 0.0};

    std::vector<ScalarField> vals, centre, closed;
    for (int c = 0; c < r; ++c)
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                for (int k = j + 1; k < n; ++k) {
                    vals.push_back(rep.comp(c, {i, j, k}, {}));
                    for (int a = 0; a < r; ++a) {
                        ScalarField acc = zero_field(n);
                        for (int d = 0; d < r; ++d)
                            acc = acc + rep.comp(d, {i, j, k}, {}) * E->C(d, a, c);
                        centre.push_back(acc);
                    }
                }
    out.rep_norm = max_abs_at(vals, pts);
    out.centre_residual = max_abs_at(centre, pts);

    if (n >= 4) {
        PQForm drep = d_nabla(rep, data.conn);
        for (int c = 0; c < r; ++c)
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    for (int k = j + 1; k < n; ++k)
                        for (int l = k + 1; l < n; ++l)
                            closed.push_back(drep.comp(c, {i, j, k, l}, {}));
        out.closedness = max_abs_at(closed, pts);
    }
    return out;
}

GaugeData canonical_nonclassical_example() {
    // fibre u(1) + su(2): index 0 spans the centre, 1..3 the su(2) block
    int n = 3, r = 4;
    Box box;
    box.lo = Vec::Constant(n, -1.0);
    box.hi = Vec::Constant(n, 1.0);
    std::vector<ScalarField> structure(static_cast<size_t>(r) * r * r, zero_field(n));
    auto eps = [](int i, int j, int k) {
        return static_cast<double>((i - j) * (j - k) * (k - i)) / 2.0;
    };
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c)
                if (eps(a, b, c) != 0.0)
                    structure[cidx(r, a + 1, b + 1, c + 1)] =
                        ScalarField::constant(n, eps(a, b, c));
    auto K = lab(n, r, std::move(structure), box, "lab-nonclassical");

    Connection conn = Connection::flat(K);

    std::vector<ScalarField> zc(static_cast<size_t>(r) * n * n, zero_field(n));
    zc[(0 * n + 0) * n + 1] = ScalarField::coordinate(n, 2);
    zc[(0 * n + 1) * n + 0] = -ScalarField::coordinate(n, 2);
    PQForm zeta(K, 2, 0, ValueKind::EValued, std::move(zc));

    return GaugeData{K, std::move(conn), std::move(zeta), euclidean_metric(K)};
}

AlgebroidPtr extension_algebroid(const AlgebroidPtr& K, const Connection& conn,
                                 const PQForm& zeta_prime, double tol) {
    int n = K->n(), rk = K->r();
    if (zeta_prime.p() != 2 || zeta_prime.q() != 0 ||
        zeta_prime.kind() != ValueKind::EValued)
        throw UsageError("extension_algebroid: zeta' must be an E-valued 2-form");
    auto pts = K->sample_points(211, 12);
    for (const Vec& x : pts)
        for (int a = 0; a < rk; ++a)
            for (int i = 0; i < n; ++i)
                if (std::abs(K->rho(a, i).value(x)) > 1e-14)
                    throw UsageError("extension_algebroid: K must have zero anchor");

    // (1) Lie derivation law: nabla acts as a derivation of the fibre bracket
    std::vector<ScalarField> law;
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < rk; ++a)
            for (int b = 0; b < rk; ++b)
                for (int c = 0; c < rk; ++c) {
                    ScalarField acc = K->C(a, b, c).diff(i);
                    for (int d = 0; d < rk; ++d)
                        acc = acc + conn.om(c, d, i) * K->C(a, b, d) -
                              K->C(d, b, c) * conn.om(d, a, i) -
                              K->C(a, d, c) * conn.om(d, b, i);
                    law.push_back(acc);
                }
    double law_res = max_abs_at(law, pts);
    if (law_res > tol)
        throw UsageError("extension_algebroid: connection is not a derivation law, residual " +
                         std::to_string(law_res));

    // (2) R = ad o zeta'
    FieldTable R = curvature(conn);
    std::vector<ScalarField> adres;
    for (int c = 0; c < rk; ++c)
        for (int b = 0; b < rk; ++b)
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    ScalarField acc = R.at({c, b, i, j});
                    for (int d = 0; d < rk; ++d)
                        acc = acc - zeta_prime.comp(d, {i, j}, {}) * K->C(d, b, c);
                    adres.push_back(acc);
                }
    double ad_res = max_abs_at(adres, pts);
    if (ad_res > tol)
        throw UsageError("extension_algebroid: curvature is not ad(zeta'), residual " +
                         std::to_string(ad_res));

    // (3) closedness of zeta'
    PQForm dz = d_nabla(zeta_prime, conn);
    std::vector<ScalarField> closed;
    for (int c = 0; c < rk; ++c)
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                for (int k = j + 1; k < n; ++k)
                    closed.push_back(dz.comp(c, {i, j, k}, {}));
    double dz_res = max_abs_at(closed, pts);
    if (dz_res > tol)
        throw UsageError("extension_algebroid: zeta' is not closed, residual " +
                         std::to_string(dz_res));

    // assemble TN + K: frame indices 0..n-1 are coordinate fields, then K
    int r = n + rk;
    std::vector<ScalarField> anchor(static_cast<size_t>(r) * n, zero_field(n));
    for (int i = 0; i < n; ++i) anchor[static_cast<size_t>(i) * n + i] =
        ScalarField::constant(n, 1.0);
    std::vector<ScalarField> structure(static_cast<size_t>(r) * r * r, zero_field(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int c = 0; c < rk; ++c)
                structure[cidx(r, i, j, n + c)] = zeta_prime.comp(c, {i, j}, {});
    for (int i = 0; i < n; ++i)
        for (int b = 0; b < rk; ++b)
            for (int c = 0; c < rk; ++c) {
                structure[cidx(r, i, n + b, n + c)] = conn.om(c, b, i);
                structure[cidx(r, n + b, i, n + c)] = -conn.om(c, b, i);
            }
    for (int a = 0; a < rk; ++a)
        for (int b = 0; b < rk; ++b)
            for (int c = 0; c < rk; ++c)
                structure[cidx(r, n + a, n + b, n + c)] = K->C(a, b, c);

    auto E = std::make_shared<LieAlgebroid>(n, r, std::move(anchor), std::move(structure),
                                            K->domain(), K->name() + "-extension");
    AxiomReport rep = check_axioms(*E, 977, 10, 4);
    if (!rep.pass)
        throw UsageError("extension_algebroid: assembled bracket fails the axioms");
    return E;
}

namespace {

std::vector<Jet2> jmat_scale_add(const std::vector<Jet2>& A, const Jet2& s,
                                 const std::vector<Jet2>& B) {
    std::vector<Jet2> out(A.size());
    for (size_t k = 0; k < A.size(); ++k) out[k] = A[k] + s * B[k];
    return out;
}

}  // namespace

Redef flatten_tangent(const Connection& conn, double step) {
    AlgebroidPtr E = conn.algebroid();
    int n = E->n();
    if (E->r() != n) throw UsageError("flatten_tangent: expects a tangent algebroid");
    auto pts = E->sample_points(97, 10);
    Vec origin = Vec::Zero(n);
    if (!E->domain().contains(origin))
        throw UsageError("flatten_tangent: domain must contain the origin");
    for (const Vec& x : pts)
        for (int a = 0; a < n; ++a)
            for (int i = 0; i < n; ++i)
                if (std::abs(E->rho(a, i).value(x) - (a == i ? 1.0 : 0.0)) > 1e-14)
                    throw UsageError("flatten_tangent: anchor is not the identity");

    FieldTable S = basic_curvature(conn);
    double worst = 0.0;
    for (const Vec& x : pts)
        for (int c = 0; c < n; ++c)
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    for (int i = 0; i < n; ++i)
                        worst = std::max(worst, std::abs(S.at({c, a, b, i}).value(x)));
    if (worst > 1e-7)
        throw UsageError("flatten_tangent: basic curvature is not flat, residual " +
                         std::to_string(worst));

    EConnOnE Gb = basic_on_E(conn);

    // double-precision transport step along axis b: P' = -A(x) P
    auto deriv_d = [Gb, n](const Vec& x, int b, const Mat& P) -> Mat {
        Mat A(n, n);
        for (int c = 0; c < n; ++c)
            for (int a = 0; a < n; ++a) A(c, a) = Gb.G(c, b, a).value(x);
        return -A * P;
    };
    auto rk4_d = [&](Vec x, int b, double target, Mat P) -> Mat {
        double len = target - x[b];
        int K = std::max(1, static_cast<int>(std::ceil(std::abs(len) / step)));
        double h = len / K;
        for (int s = 0; s < K; ++s) {
            Vec x1 = x, x2 = x;
            x1[b] = x[b] + s * h + 0.5 * h;
            x2[b] = x[b] + (s + 1) * h;
            Vec x0 = x;
            x0[b] = x[b] + s * h;
            Mat k1 = deriv_d(x0, b, P);
            Mat k2 = deriv_d(x1, b, P + 0.5 * h * k1);
            Mat k3 = deriv_d(x1, b, P + 0.5 * h * k2);
            Mat k4 = deriv_d(x2, b, P + h * k3);
            P += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        }
        return P;
    };

    // loop holonomy spot-check on the (0,1) rectangle
    if (n >= 2) {
        double c0 = 0.5 * E->domain().hi[0], c1 = 0.5 * E->domain().hi[1];
        Mat P = Mat::Identity(n, n);
        Vec x = origin;
        P = rk4_d(x, 0, c0, P); x[0] = c0;
        P = rk4_d(x, 1, c1, P); x[1] = c1;
        P = rk4_d(x, 0, 0.0, P); x[0] = 0.0;
        P = rk4_d(x, 1, 0.0, P);
        if ((P - Mat::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-5)
            throw DomainError("flatten_tangent: parallel transport is path-dependent");
    }

    // jet-level transport from the origin, axis by axis
    auto fn = [Gb, E, n, step](const Vec& x) -> std::vector<Jet2> {
        std::vector<Jet2> seeds = Jet2::seed_all(x);
        std::vector<Jet2> pos(n, Jet2::constant(n, 0.0));
        std::vector<Jet2> P(static_cast<size_t>(n) * n, Jet2::constant(n, 0.0));
        for (int c = 0; c < n; ++c) P[static_cast<size_t>(c) * n + c] =
            Jet2::constant(n, 1.0);

        for (int b = 0; b < n; ++b) {
            int K = std::max(1, static_cast<int>(std::ceil(std::abs(x[b]) / step)));
            Jet2 h = seeds[b] / static_cast<double>(K);
            auto deriv = [&](const Jet2& t, const std::vector<Jet2>& Pc) {
                std::vector<Jet2> at = pos;
                at[b] = t;
                std::vector<Jet2> out(static_cast<size_t>(n) * n,
                                      Jet2::constant(n, 0.0));
                for (int c = 0; c < n; ++c)
                    for (int a = 0; a < n; ++a) {
                        Jet2 A = Gb.G(c, b, a).at(at);
                        for (int m = 0; m < n; ++m)
                            out[static_cast<size_t>(c) * n + m] =
                                out[static_cast<size_t>(c) * n + m] -
                                A * Pc[static_cast<size_t>(a) * n + m];
                    }
                return out;
            };
            for (int s = 0; s < K; ++s) {
                Jet2 t0 = h * static_cast<double>(s);
                Jet2 tm = t0 + h * 0.5, t1 = t0 + h;
                auto k1 = deriv(t0, P);
                auto k2 = deriv(tm, jmat_scale_add(P, h * 0.5, k1));
                auto k3 = deriv(tm, jmat_scale_add(P, h * 0.5, k2));
                auto k4 = deriv(t1, jmat_scale_add(P, h, k3));
                for (size_t k = 0; k < P.size(); ++k)
                    P[k] = P[k] + h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
            }
            pos[b] = seeds[b];
        }

        // lambda = 1 - P^{-1}
        std::vector<std::vector<Jet2>> A(n, std::vector<Jet2>(n));
        for (int c = 0; c < n; ++c)
            for (int m = 0; m < n; ++m) A[c][m] = P[static_cast<size_t>(c) * n + m];
        std::vector<Jet2> lam(static_cast<size_t>(n) * n, Jet2::constant(n, 0.0));
        for (int col = 0; col < n; ++col) {
            std::vector<Jet2> e(n, Jet2::constant(n, 0.0));
            e[col] = Jet2::constant(n, 1.0);
            auto inv_col = jet_linear_solve(A, e);  // column col of P^{-1}
            for (int row = 0; row < n; ++row) {
                Jet2 v = -inv_col[row];
                if (row == col) v = v + 1.0;
                lam[static_cast<size_t>(row) * n + col] = v;
            }
        }
        return lam;
    };
    auto lam_fields = make_field_group(n, n * n, fn);
    Redef rd = make_redef(E, std::move(lam_fields));

    // post-check: the redefined connection is flat
    FieldTable Rp = curvature(redefine_connection(conn, rd));
    double flat = 0.0;
    for (const Vec& x : pts)
        for (int c = 0; c < n; ++c)
            for (int a = 0; a < n; ++a)
                for (int i = 0; i < n; ++i)
                    for (int j = i + 1; j < n; ++j)
                        flat = std::max(flat, std::abs(Rp.at({c, a, i, j}).value(x)));
    if (flat > 1e-5)
        throw DomainError("flatten_tangent: redefined connection is not flat, residual " +
                          std::to_string(flat));
    return rd;
}

Mat centre_basic(const Connection& conn, const Vec& x, double threshold) {
    const auto& E = conn.algebroid();
    if (!E->domain().contains(x)) throw DomainError("centre_basic: point outside domain");
    int n = E->n(), r = E->r();
    EConnOnE Gb = basic_on_E(conn);
    EConnOnTN Bb = basic_on_TN(conn);
    Mat M(n + r * r + n * n, r);
    int row = 0;
    for (int i = 0; i < n; ++i, ++row)
        for (int a = 0; a < r; ++a) M(row, a) = E->rho(a, i).value(x);
    for (int b = 0; b < r; ++b)
        for (int c = 0; c < r; ++c, ++row)
            for (int a = 0; a < r; ++a) M(row, a) = Gb.G(c, a, b).value(x);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j, ++row)
            for (int a = 0; a < r; ++a) M(row, a) = Bb.B(j, a, i).value(x);

    Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int null_dim = 0;
    for (int k = 0; k < r; ++k)
        if (k >= sv.size() || sv[k] < threshold) ++null_dim;
    Mat basis(r, null_dim);
    for (int k = 0; k < null_dim; ++k) basis.col(k) = svd.matrixV().col(r - null_dim + k);
    return basis;
}

GaugeData direct_product(const GaugeData& d1, const GaugeData& d2) {
    auto E = cymh::direct_product(d1.E, d2.E);
    int n1 = d1.E->n(), r1 = d1.E->r(), n2 = d2.E->n(), r2 = d2.E->r();
    int n = n1 + n2, r = r1 + r2;

    std::vector<ScalarField> omega(static_cast<size_t>(r) * r * n, zero_field(n));
    for (int a = 0; a < r; ++a)
        for (int i = 0; i < n; ++i)
            for (int b = 0; b < r; ++b) {
                ScalarField f = zero_field(n);
                if (a < r1 && b < r1 && i < n1)
                    f = embed(d1.conn.om(b, a, i), n, 0);
                else if (a >= r1 && b >= r1 && i >= n1)
                    f = embed(d2.conn.om(b - r1, a - r1, i - n1), n, n1);
                omega[(static_cast<size_t>(a) * n + i) * r + b] = f;
            }
    Connection conn(E, std::move(omega));

    std::vector<ScalarField> zc(static_cast<size_t>(r) * n * n, zero_field(n));
    for (int c = 0; c < r; ++c)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                ScalarField f = zero_field(n);
                if (c < r1 && i < n1 && j < n1)
                    f = embed(d1.zeta.comp(c, {i, j}, {}), n, 0);
                else if (c >= r1 && i >= n1 && j >= n1)
                    f = embed(d2.zeta.comp(c - r1, {i - n1, j - n1}, {}), n, n1);
                zc[(static_cast<size_t>(c) * n + i) * n + j] = f;
            }
    PQForm zeta(E, 2, 0, ValueKind::EValued, std::move(zc));

    Metric m;
    m.kappa.assign(static_cast<size_t>(r) * r, zero_field(n));
    m.g.assign(static_cast<size_t>(n) * n, zero_field(n));
    for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) {
            if (a < r1 && b < r1)
                m.kappa[static_cast<size_t>(a) * r + b] =
                    embed(d1.metric.k(r1, a, b), n, 0);
            else if (a >= r1 && b >= r1)
                m.kappa[static_cast<size_t>(a) * r + b] =
                    embed(d2.metric.k(r2, a - r1, b - r1), n, n1);
        }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i < n1 && j < n1)
                m.g[static_cast<size_t>(i) * n + j] = embed(d1.metric.gm(n1, i, j), n, 0);
            else if (i >= n1 && j >= n1)
                m.g[static_cast<size_t>(i) * n + j] =
                    embed(d2.metric.gm(n2, i - n1, j - n1), n, n1);
        }

    return GaugeData{E, std::move(conn), std::move(zeta), std::move(m)};
}

}  // namespace cymh
