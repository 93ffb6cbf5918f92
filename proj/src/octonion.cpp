#include "cymh/octonion.hpp"

#include <cmath>

namespace cymh {

Oct Oct::unit(int A) {
    if (A < 0 || A > 7) throw UsageError("Oct::unit: index out of range");
    Oct z;
    z.c[A] = 1.0;
    return z;
}

Phi3Form::Phi3Form() {
    v_.fill(0.0);
    // independent triples on the labels of e_1..e_7 (stored 0-based)
    const int triples[7][3] = {{1, 2, 3}, {1, 4, 5}, {1, 6, 7}, {2, 4, 6},
                               {2, 5, 7}, {3, 4, 7}, {3, 5, 6}};
    const double signs[7] = {1, 1, 1, 1, -1, -1, -1};
    auto set = [&](int i, int j, int k, double s) {
        v_[((i - 1) * 7 + (j - 1)) * 7 + (k - 1)] = s;
    };
    for (int t = 0; t < 7; ++t) {
        int i = triples[t][0], j = triples[t][1], k = triples[t][2];
        double s = signs[t];
        set(i, j, k, s);
        set(j, k, i, s);
        set(k, i, j, s);
        set(j, i, k, -s);
        set(i, k, j, -s);
        set(k, j, i, -s);
    }
}

const Phi3Form& phi() {
    static const Phi3Form form;
    return form;
}

Vec pmap(const Vec& x, const Vec& y) {
    if (x.size() != 7 || y.size() != 7)
        throw UsageError("pmap: arguments must be 7-vectors");
    const Phi3Form& f = phi();
    Vec out = Vec::Zero(7);
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j) {
            if (x[i] == 0.0 || y[j] == 0.0) continue;
            for (int k = 0; k < 7; ++k) out[k] += f.at(i, j, k) * x[i] * y[j];
        }
    return out;
}

Oct oct_mul(const Oct& z, const Oct& w) {
    Vec x = z.c.tail(7), y = w.c.tail(7);
    Oct out;
    out.c[0] = z.c[0] * w.c[0] - x.dot(y);
    out.c.tail(7) = z.c[0] * y + w.c[0] * x + pmap(x, y);
    return out;
}

Oct oct_conj(const Oct& z) {
    Oct out;
    out.c[0] = z.c[0];
    out.c.tail(7) = -z.c.tail(7);
    return out;
}

double oct_norm(const Oct& z) { return z.c.norm(); }

Vec frame_Y(const Oct& z, int j) {
    if (j < 1 || j > 7) throw UsageError("frame_Y: index must be in 1..7");
    if (std::abs(oct_norm(z) - 1.0) > 1e-10)
        throw UsageError("frame_Y: z must be a unit octonion");
    return oct_mul(Oct::unit(j), z).c;
}

Oct s7_chart(const Vec& u) {
    if (u.size() != 7) throw UsageError("s7_chart: argument must be a 7-vector");
    double s = 1.0 + u.squaredNorm();
    Oct z;
    z.c[0] = (2.0 - s) / s;
    z.c.tail(7) = 2.0 * u / s;
    return z;
}

Mat s7_chart_jac(const Vec& u) {
    if (u.size() != 7) throw UsageError("s7_chart_jac: argument must be a 7-vector");
    double s = 1.0 + u.squaredNorm();
    Mat J(8, 7);
    for (int i = 0; i < 7; ++i) J(0, i) = -4.0 * u[i] / (s * s);
    for (int j = 0; j < 7; ++j)
        for (int i = 0; i < 7; ++i)
            J(1 + j, i) = 2.0 * (i == j ? 1.0 : 0.0) / s - 4.0 * u[j] * u[i] / (s * s);
    return J;
}

GaugeData s7_gauge_data() {
    const int n = 7, r = 7;
    const Phi3Form& f = phi();

    // chart map sigma as base fields
    ScalarField s = ScalarField::constant(n, 1.0);
    for (int i = 0; i < n; ++i)
        s = s + ScalarField::coordinate(n, i) * ScalarField::coordinate(n, i);
    std::vector<ScalarField> sigma;
    sigma.push_back((2.0 - s) / s);
    for (int j = 0; j < 7; ++j)
        sigma.push_back(2.0 * ScalarField::coordinate(n, j) / s);

    // frame vectors Y_a = e_{a+1} . sigma in ambient components
    std::vector<ScalarField> Y(static_cast<size_t>(r) * 8,
                               ScalarField::constant(n, 0.0));
    for (int a = 0; a < r; ++a) {
        Y[static_cast<size_t>(a) * 8 + 0] = -sigma[1 + a];
        for (int k = 0; k < 7; ++k) {
            ScalarField acc = (a == k) ? sigma[0] : ScalarField::constant(n, 0.0);
            for (int m = 0; m < 7; ++m)
                if (f.at(a, m, k) != 0.0) acc = acc + f.at(a, m, k) * sigma[1 + m];
            Y[static_cast<size_t>(a) * 8 + 1 + k] = acc;
        }
    }

    // anchor: Dsigma rho_a = Y_a; the chart is conformal with
    // Dsigma^T Dsigma = (4/s^2) Id, so rho^i_a = (s^2/4) sum_A d_i sigma^A Y_a^A
    std::vector<ScalarField> anchor(static_cast<size_t>(r) * n,
                                    ScalarField::constant(n, 0.0));
    ScalarField conf = s * s / 4.0;
    for (int a = 0; a < r; ++a)
        for (int i = 0; i < n; ++i) {
            ScalarField acc = ScalarField::constant(n, 0.0);
            for (int A = 0; A < 8; ++A)
                acc = acc + sigma[A].diff(i) * Y[static_cast<size_t>(a) * 8 + A];
            anchor[static_cast<size_t>(a) * n + i] = conf * acc;
        }
    auto rho = [&](int a, int i) -> const ScalarField& {
        return anchor[static_cast<size_t>(a) * n + i];
    };

    // xi = rho^{-1}: xi^a_i = Inv[i*r + a] for the row-major matrix [a][i]
    std::vector<ScalarField> xi = matrix_inverse_fields(anchor, r);
    auto xif = [&](int a, int i) -> const ScalarField& {
        return xi[static_cast<size_t>(i) * r + a];
    };

    // structure functions from the frame brackets
    std::vector<ScalarField> structure(static_cast<size_t>(r) * r * r,
                                       ScalarField::constant(n, 0.0));
    for (int a = 0; a < r; ++a)
        for (int b = a + 1; b < r; ++b) {
            std::vector<ScalarField> br(n, ScalarField::constant(n, 0.0));
            for (int i = 0; i < n; ++i) {
                ScalarField acc = ScalarField::constant(n, 0.0);
                for (int j = 0; j < n; ++j)
                    acc = acc + rho(a, j) * rho(b, i).diff(j) -
                          rho(b, j) * rho(a, i).diff(j);
                br[i] = acc;
            }
            for (int c = 0; c < r; ++c) {
                ScalarField acc = ScalarField::constant(n, 0.0);
                for (int i = 0; i < n; ++i) acc = acc + xif(c, i) * br[i];
                structure[(static_cast<size_t>(a) * r + b) * r + c] = acc;
                structure[(static_cast<size_t>(b) * r + a) * r + c] = -acc;
            }
        }

    Box domain;
    domain.lo = Vec::Constant(n, -0.7);
    domain.hi = Vec::Constant(n, 0.7);
    auto E = std::make_shared<LieAlgebroid>(n, r, anchor, structure, domain,
                                            "octonion-s7");

    // connection with nabla_{Y_a} Y_b = [Y_a, Y_b]: in coordinate directions
    // omega^c_{bi} = xi^a_i C^c_{ab}
    std::vector<ScalarField> omega(static_cast<size_t>(r) * n * r,
                                   ScalarField::constant(n, 0.0));
    for (int b = 0; b < r; ++b)
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < r; ++c) {
                ScalarField acc = ScalarField::constant(n, 0.0);
                for (int a = 0; a < r; ++a)
                    acc = acc + xif(a, i) * E->C(a, b, c);
                omega[(static_cast<size_t>(b) * n + i) * r + c] = acc;
            }
    Connection conn(E, std::move(omega));

    // zeta^c_{ij} = xi^a_i xi^b_j C^c_{ab} (the torsion pulled to the chart)
    std::vector<ScalarField> zc(static_cast<size_t>(r) * n * n,
                                ScalarField::constant(n, 0.0));
    for (int c = 0; c < r; ++c)
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                ScalarField acc = ScalarField::constant(n, 0.0);
                for (int a = 0; a < r; ++a)
                    for (int b = 0; b < r; ++b)
                        acc = acc + xif(a, i) * xif(b, j) * E->C(a, b, c);
                zc[(static_cast<size_t>(c) * n + i) * n + j] = acc;
                zc[(static_cast<size_t>(c) * n + j) * n + i] = -acc;
            }
    PQForm zeta(E, 2, 0, ValueKind::EValued, std::move(zc));

    // kappa = delta in the Y-frame, g the round metric (conformally flat)
    std::vector<ScalarField> kappa(static_cast<size_t>(r) * r,
                                   ScalarField::constant(n, 0.0));
    for (int a = 0; a < r; ++a)
        kappa[static_cast<size_t>(a) * r + a] = ScalarField::constant(n, 1.0);
    std::vector<ScalarField> g(static_cast<size_t>(n) * n,
                               ScalarField::constant(n, 0.0));
    for (int i = 0; i < n; ++i) g[static_cast<size_t>(i) * n + i] = 4.0 / (s * s);

    Metric metric = make_metric(E, std::move(kappa), std::move(g),
                                E->sample_points(8131, 3));
    return GaugeData{E, conn, zeta, metric};
}

}  // namespace cymh
