#include "cymh/fields.hpp"

#include <algorithm>
#include <cmath>

namespace cymh {

namespace {

void require_sizes(const AlgebroidPtr& E, const FieldConfig& cfg) {
    if (cfg.d <= 0 || cfg.phi.size() != static_cast<size_t>(E->n()) ||
        cfg.A.size() != static_cast<size_t>(E->r()) * cfg.d ||
        cfg.eps.size() != static_cast<size_t>(E->r()))
        throw UsageError("field configuration has inconsistent dimensions");
}

Vec phi_at(const AlgebroidPtr& E, const FieldConfig& cfg, const Vec& x) {
    Vec y = cfg.phi_value(x);
    if (!E->domain().contains(y))
        throw DomainError("Higgs field leaves the base chart");
    return y;
}

Mat dphi_at(const FieldConfig& cfg, const Vec& x) {
    int n = static_cast<int>(cfg.phi.size());
    Mat J(n, cfg.d);
    for (int i = 0; i < n; ++i)
        for (int mu = 0; mu < cfg.d; ++mu) J(i, mu) = cfg.phi[i].diff(mu).value(x);
    return J;
}

// covariant derivative (nabla mu)^a_i of a section, as base-chart fields
std::vector<ScalarField> cov_deriv(const Connection& conn, const Section& mu) {
    const auto& E = conn.algebroid();
    int n = E->n(), r = E->r();
    std::vector<ScalarField> out(static_cast<size_t>(r) * n,
                                 ScalarField::constant(n, 0.0));
    for (int a = 0; a < r; ++a)
        for (int i = 0; i < n; ++i) {
            ScalarField acc = mu.comp[a].diff(i);
            for (int c = 0; c < r; ++c) acc = acc + conn.om(a, c, i) * mu.comp[c];
            out[static_cast<size_t>(a) * n + i] = acc;
        }
    return out;
}

}  // namespace

Spacetime euclidean_spacetime(int d) {
    Spacetime st;
    st.d = d;
    st.eta = Mat::Identity(d, d);
    return st;
}

Vec FieldConfig::phi_value(const Vec& x) const {
    Vec y(phi.size());
    for (size_t i = 0; i < phi.size(); ++i) y[i] = phi[i].value(x);
    return y;
}

ScalarField compose_with_phi(const ScalarField& f, const FieldConfig& cfg) {
    std::vector<ScalarField> phi = cfg.phi;
    return ScalarField::from_fn(cfg.d, [f, phi](const std::vector<Jet2>& xj) {
        std::vector<Jet2> yj;
        yj.reserve(phi.size());
        for (const auto& p : phi) yj.push_back(p.at(xj));
        return f.at(yj);
    });
}

std::vector<double> pullback_connection(const Connection& conn, const FieldConfig& cfg,
                                        const Vec& x) {
    const auto& E = conn.algebroid();
    require_sizes(E, cfg);
    int n = E->n(), r = E->r(), d = cfg.d;
    Vec y = phi_at(E, cfg, x);
    Mat J = dphi_at(cfg, x);
    std::vector<double> Om(static_cast<size_t>(r) * r * d, 0.0);
    for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b)
            for (int mu = 0; mu < d; ++mu) {
                double acc = 0.0;
                for (int i = 0; i < n; ++i) acc += J(i, mu) * conn.om(a, b, i).value(y);
                Om[(static_cast<size_t>(a) * r + b) * d + mu] = acc;
            }
    return Om;
}

Mat minimal_coupling(const AlgebroidPtr& E, const FieldConfig& cfg, const Vec& x) {
    require_sizes(E, cfg);
    int n = E->n(), r = E->r(), d = cfg.d;
    Vec y = phi_at(E, cfg, x);
    Mat D = dphi_at(cfg, x);
    for (int i = 0; i < n; ++i)
        for (int mu = 0; mu < d; ++mu)
            for (int a = 0; a < r; ++a)
                D(i, mu) -= E->rho(a, i).value(y) * cfg.a(a, mu).value(x);
    return D;
}

std::vector<Mat> field_strength_F(const AlgebroidPtr& E, const Connection& conn,
                                  const FieldConfig& cfg, const Vec& x) {
    require_sizes(E, cfg);
    int r = E->r(), d = cfg.d;
    Vec y = phi_at(E, cfg, x);
    std::vector<double> Om = pullback_connection(conn, cfg, x);
    PQForm t = e_torsion(nabla_rho(conn));
    std::vector<Mat> F(r, Mat::Zero(d, d));
    for (int a = 0; a < r; ++a)
        for (int mu = 0; mu < d; ++mu)
            for (int nu = mu + 1; nu < d; ++nu) {
                double acc = cfg.a(a, nu).diff(mu).value(x) -
                             cfg.a(a, mu).diff(nu).value(x);
                for (int b = 0; b < r; ++b)
                    acc += Om[(static_cast<size_t>(a) * r + b) * d + mu] *
                               cfg.a(b, nu).value(x) -
                           Om[(static_cast<size_t>(a) * r + b) * d + nu] *
                               cfg.a(b, mu).value(x);
                for (int b = 0; b < r; ++b)
                    for (int c = 0; c < r; ++c)
                        acc -= t.comp(a, {}, {b, c}).value(y) * cfg.a(b, mu).value(x) *
                               cfg.a(c, nu).value(x);
                F[a](mu, nu) = acc;
                F[a](nu, mu) = -acc;
            }
    return F;
}

std::vector<Mat> field_strength_G(const GaugeData& data, const FieldConfig& cfg,
                                  const Vec& x) {
    const auto& E = data.E;
    int n = E->n(), r = E->r(), d = cfg.d;
    Vec y = phi_at(E, cfg, x);
    std::vector<Mat> G = field_strength_F(E, data.conn, cfg, x);
    Mat D = minimal_coupling(E, cfg, x);
    for (int a = 0; a < r; ++a)
        for (int mu = 0; mu < d; ++mu)
            for (int nu = mu + 1; nu < d; ++nu) {
                double acc = 0.0;
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        acc += data.zeta.comp(a, {i, j}, {}).value(y) * D(i, mu) *
                               D(j, nu);
                G[a](mu, nu) += acc;
                G[a](nu, mu) -= acc;
            }
    return G;
}

GaugeDelta gauge_delta(const AlgebroidPtr& E, const Connection& conn,
                       const FieldConfig& cfg, const Vec& x) {
    require_sizes(E, cfg);
    int n = E->n(), r = E->r(), d = cfg.d;
    Vec y = phi_at(E, cfg, x);
    GaugeDelta out;
    out.phi = Vec::Zero(n);
    out.A = Mat::Zero(r, d);
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < r; ++a)
            out.phi[i] -= E->rho(a, i).value(y) * cfg.eps[a].value(x);

    EConnOnE Gb = basic_on_E(conn);
    std::vector<double> Om = pullback_connection(conn, cfg, x);
    for (int a = 0; a < r; ++a)
        for (int mu = 0; mu < d; ++mu) {
            double acc = -cfg.eps[a].diff(mu).value(x);
            for (int b = 0; b < r; ++b) {
                for (int c = 0; c < r; ++c)
                    acc += Gb.G(a, b, c).value(y) * cfg.eps[b].value(x) *
                           cfg.a(c, mu).value(x);
                acc -= cfg.eps[b].value(x) *
                       Om[(static_cast<size_t>(a) * r + b) * d + mu];
            }
            out.A(a, mu) = acc;
        }
    return out;
}

FieldConfig gauge_flow_step(const AlgebroidPtr& E, const Connection& conn,
                            const FieldConfig& cfg, double dt, FlowScheme scheme) {
    require_sizes(E, cfg);
    int n = E->n(), r = E->r(), d = cfg.d;
    EConnOnE Gb = basic_on_E(conn);
    std::vector<ScalarField> deps;
    deps.reserve(static_cast<size_t>(r) * d);
    for (int a = 0; a < r; ++a)
        for (int mu = 0; mu < d; ++mu) deps.push_back(cfg.eps[a].diff(mu));
    std::vector<ScalarField> phi = cfg.phi, A = cfg.A, eps = cfg.eps;
    Connection cc = conn;

    auto fn = [E, cc, Gb, phi, A, eps, deps, n, r, d, dt,
               scheme](const Vec& x) -> std::vector<Jet2> {
        std::vector<Jet2> seeds = Jet2::seed_all(x);
        std::vector<Jet2> P, W, ej, dej;
        for (const auto& f : phi) P.push_back(f.at(seeds));
        for (const auto& f : A) W.push_back(f.at(seeds));
        for (const auto& f : eps) ej.push_back(f.at(seeds));
        for (const auto& f : deps) dej.push_back(f.at(seeds));

        auto rhs = [&](const std::vector<Jet2>& Pc, const std::vector<Jet2>& Wc,
                       std::vector<Jet2>& dP, std::vector<Jet2>& dW) {
            Vec yv(n);
            for (int i = 0; i < n; ++i) yv[i] = Pc[i].v;
            if (!E->domain().contains(yv))
                throw DomainError("gauge flow leaves the base chart");
            dP.assign(n, Jet2::constant(d, 0.0));
            dW.assign(static_cast<size_t>(r) * d, Jet2::constant(d, 0.0));
            for (int i = 0; i < n; ++i)
                for (int a = 0; a < r; ++a)
                    dP[i] = dP[i] - E->rho(a, i).at(Pc) * ej[a];
            for (int a = 0; a < r; ++a)
                for (int mu = 0; mu < d; ++mu) {
                    Jet2 acc = -dej[static_cast<size_t>(a) * d + mu];
                    for (int b = 0; b < r; ++b) {
                        for (int c = 0; c < r; ++c)
                            acc = acc + Gb.G(a, b, c).at(Pc) * ej[b] *
                                      Wc[static_cast<size_t>(c) * d + mu];
                        for (int i = 0; i < n; ++i)
                            acc = acc - ej[b] * cc.om(a, b, i).at(Pc) *
                                      jet_partial(Pc[i], mu);
                    }
                    dW[static_cast<size_t>(a) * d + mu] = acc;
                }
        };

        std::vector<Jet2> dP, dW;
        if (scheme == FlowScheme::euler) {
            rhs(P, W, dP, dW);
            for (int i = 0; i < n; ++i) P[i] = P[i] + dt * dP[i];
            for (size_t k = 0; k < W.size(); ++k) W[k] = W[k] + dt * dW[k];
        } else {
            auto shift = [](const std::vector<Jet2>& a, double s,
                            const std::vector<Jet2>& b) {
                std::vector<Jet2> out(a.size());
                for (size_t k = 0; k < a.size(); ++k) out[k] = a[k] + s * b[k];
                return out;
            };
            std::vector<Jet2> k1p, k1w, k2p, k2w, k3p, k3w, k4p, k4w;
            rhs(P, W, k1p, k1w);
            rhs(shift(P, dt / 2, k1p), shift(W, dt / 2, k1w), k2p, k2w);
            rhs(shift(P, dt / 2, k2p), shift(W, dt / 2, k2w), k3p, k3w);
            rhs(shift(P, dt, k3p), shift(W, dt, k3w), k4p, k4w);
            for (int i = 0; i < n; ++i)
                P[i] = P[i] +
                       dt / 6.0 * (k1p[i] + 2.0 * k2p[i] + 2.0 * k3p[i] + k4p[i]);
            for (size_t k = 0; k < W.size(); ++k)
                W[k] = W[k] +
                       dt / 6.0 * (k1w[k] + 2.0 * k2w[k] + 2.0 * k3w[k] + k4w[k]);
        }
        std::vector<Jet2> out;
        out.reserve(P.size() + W.size());
        for (auto& j : P) out.push_back(j);
        for (auto& j : W) out.push_back(j);
        return out;
    };

    auto group = make_field_group(d, n + r * d, fn);
    FieldConfig out;
    out.d = d;
    out.phi.assign(group.begin(), group.begin() + n);
    out.A.assign(group.begin() + n, group.end());
    out.eps = cfg.eps;
    return out;
}

std::vector<Mat> gauge_delta_F(const GaugeData& data, const FieldConfig& cfg,
                               const Vec& x) {
    const auto& E = data.E;
    require_sizes(E, cfg);
    int n = E->n(), r = E->r(), d = cfg.d;
    Vec y = phi_at(E, cfg, x);
    Mat D = minimal_coupling(E, cfg, x);
    FieldTable R = curvature(data.conn);
    FieldTable S = basic_curvature(data.conn);
    std::vector<Mat> out(r, Mat::Zero(d, d));
    for (int a = 0; a < r; ++a)
        for (int mu = 0; mu < d; ++mu)
            for (int nu = mu + 1; nu < d; ++nu) {
                double acc = 0.0;
                for (int b = 0; b < r; ++b) {
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j)
                            acc += R.at({a, b, i, j}).value(y) * D(i, mu) * D(j, nu) *
                                   cfg.eps[b].value(x);
                    for (int c = 0; c < r; ++c)
                        for (int i = 0; i < n; ++i)
                            acc += S.at({a, b, c, i}).value(y) * cfg.eps[b].value(x) *
                                   (cfg.a(c, mu).value(x) * D(i, nu) -
                                    cfg.a(c, nu).value(x) * D(i, mu));
                }
                out[a](mu, nu) = -acc;
                out[a](nu, mu) = acc;
            }
    return out;
}

std::vector<Mat> gauge_delta_G(const GaugeData& data, const FieldConfig& cfg,
                               const Vec& x) {
    const auto& E = data.E;
    require_sizes(E, cfg);
    int n = E->n(), r = E->r(), d = cfg.d;
    Vec y = phi_at(E, cfg, x);
    Mat D = minimal_coupling(E, cfg, x);
    FieldTable R = curvature(data.conn);
    FieldTable S = basic_curvature(data.conn);
    EConnOnE Gb = basic_on_E(data.conn);
    EConnOnTN Bb = basic_on_TN(data.conn);

    // (nabla^bas_eps zeta)^a_{ij} at y
    std::vector<double> dz(static_cast<size_t>(r) * n * n, 0.0);
    for (int a = 0; a < r; ++a)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double acc = 0.0;
                for (int b = 0; b < r; ++b) {
                    double eb = cfg.eps[b].value(x);
                    for (int k = 0; k < n; ++k)
                        acc += eb * (E->rho(b, k).value(y) *
                                         data.zeta.comp(a, {i, j}, {}).diff(k).value(y) -
                                     Bb.B(k, b, i).value(y) *
                                         data.zeta.comp(a, {k, j}, {}).value(y) -
                                     Bb.B(k, b, j).value(y) *
                                         data.zeta.comp(a, {i, k}, {}).value(y));
                    for (int c = 0; c < r; ++c)
                        acc += eb * Gb.G(a, b, c).value(y) *
                               data.zeta.comp(c, {i, j}, {}).value(y);
                }
                dz[(static_cast<size_t>(a) * n + i) * n + j] = acc;
            }

    std::vector<Mat> out(r, Mat::Zero(d, d));
    for (int a = 0; a < r; ++a)
        for (int mu = 0; mu < d; ++mu)
            for (int nu = mu + 1; nu < d; ++nu) {
                double acc = 0.0;
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        double rr = 0.0;
                        for (int b = 0; b < r; ++b)
                            rr += R.at({a, b, i, j}).value(y) * cfg.eps[b].value(x);
                        rr += dz[(static_cast<size_t>(a) * n + i) * n + j];
                        acc += rr * D(i, mu) * D(j, nu);
                    }
                for (int b = 0; b < r; ++b)
                    for (int c = 0; c < r; ++c)
                        for (int i = 0; i < n; ++i)
                            acc += S.at({a, b, c, i}).value(y) * cfg.eps[b].value(x) *
                                   (cfg.a(c, mu).value(x) * D(i, nu) -
                                    cfg.a(c, nu).value(x) * D(i, mu));
                out[a](mu, nu) = -acc;
                out[a](nu, mu) = acc;
            }
    return out;
}

double lagrangian_density(const GaugeData& data, const Spacetime& st,
                          const ScalarField& V, const FieldConfig& cfg, const Vec& x) {
    const auto& E = data.E;
    int n = E->n(), r = E->r(), d = cfg.d;
    if (st.d != d) throw UsageError("spacetime dimension mismatch");
    Vec y = phi_at(E, cfg, x);
    Mat etainv = st.eta.inverse();
    std::vector<Mat> G = field_strength_G(data, cfg, x);
    Mat D = minimal_coupling(E, cfg, x);

    double lag = -V.value(y);
    for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) {
            double kab = data.metric.k(r, a, b).value(y);
            if (kab == 0.0) continue;
            double quad = 0.0;
            for (int mu = 0; mu < d; ++mu)
                for (int nu = 0; nu < d; ++nu)
                    for (int rh = 0; rh < d; ++rh)
                        for (int sg = 0; sg < d; ++sg)
                            quad += G[a](mu, nu) * G[b](rh, sg) * etainv(mu, rh) *
                                    etainv(nu, sg);
            lag += -0.25 * kab * quad;
        }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double gij = data.metric.gm(n, i, j).value(y);
            if (gij == 0.0) continue;
            for (int mu = 0; mu < d; ++mu)
                for (int nu = 0; nu < d; ++nu)
                    lag += gij * D(i, mu) * D(j, nu) * etainv(mu, nu);
        }
    return lag;
}

std::vector<double> bianchi_G_residual(const GaugeData& data, const FieldConfig& cfg,
                                       const Vec& x) {
    const auto& E = data.E;
    require_sizes(E, cfg);
    int n = E->n(), r = E->r(), d = cfg.d;
    Vec y = phi_at(E, cfg, x);
    for (int a = 0; a < r; ++a)
        for (int i = 0; i < n; ++i)
            if (std::abs(E->rho(a, i).value(y)) > 1e-14)
                throw UsageError("bianchi_G_residual: nonzero anchor");

    // G as spacetime fields (anchor zero: D phi = d phi, Omega via phi)
    std::vector<ScalarField> Gf(static_cast<size_t>(r) * d * d,
                                ScalarField::constant(d, 0.0));
    for (int a = 0; a < r; ++a)
        for (int mu = 0; mu < d; ++mu)
            for (int nu = 0; nu < d; ++nu) {
                ScalarField acc = cfg.a(a, nu).diff(mu) - cfg.a(a, mu).diff(nu);
                for (int b = 0; b < r; ++b) {
                    for (int i = 0; i < n; ++i)
                        acc = acc +
                              compose_with_phi(data.conn.om(a, b, i), cfg) *
                                  (cfg.phi[i].diff(mu) * cfg.a(b, nu) -
                                   cfg.phi[i].diff(nu) * cfg.a(b, mu));
                    for (int c = 0; c < r; ++c)
                        acc = acc + compose_with_phi(E->C(b, c, a), cfg) *
                                        cfg.a(b, mu) * cfg.a(c, nu);
                }
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        acc = acc + compose_with_phi(data.zeta.comp(a, {i, j}, {}), cfg) *
                                        cfg.phi[i].diff(mu) * cfg.phi[j].diff(nu);
                Gf[(static_cast<size_t>(a) * d + mu) * d + nu] = acc;
            }
    auto gf = [&](int a, int mu, int nu) -> const ScalarField& {
        return Gf[(static_cast<size_t>(a) * d + mu) * d + nu];
    };

    PQForm dz = d_nabla(data.zeta, data.conn);
    Mat J = dphi_at(cfg, x);
    std::vector<double> Om = pullback_connection(data.conn, cfg, x);

    std::vector<double> res(static_cast<size_t>(r) * d * d * d, 0.0);
    for (int a = 0; a < r; ++a)
        for (int mu = 0; mu < d; ++mu)
            for (int nu = 0; nu < d; ++nu)
                for (int sg = 0; sg < d; ++sg) {
                    int cyc[3][3] = {{mu, nu, sg}, {nu, sg, mu}, {sg, mu, nu}};
                    double acc = 0.0;
                    for (auto& p : cyc) {
                        acc += gf(a, p[1], p[2]).diff(p[0]).value(x);
                        for (int b = 0; b < r; ++b) {
                            acc += Om[(static_cast<size_t>(a) * r + b) * d + p[0]] *
                                   gf(b, p[1], p[2]).value(x);
                            for (int c = 0; c < r; ++c)
                                acc += E->C(b, c, a).value(y) *
                                       cfg.a(b, p[0]).value(x) *
                                       gf(c, p[1], p[2]).value(x);
                        }
                    }
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j)
                            for (int k = 0; k < n; ++k)
                                acc -= dz.comp(a, {i, j, k}, {}).value(y) * J(i, mu) *
                                       J(j, nu) * J(k, sg);
                    res[((static_cast<size_t>(a) * d + mu) * d + nu) * d + sg] = acc;
                }
    return res;
}

namespace {

// delta_phi and delta_A of the configuration under the pullback parameter
// eps = nu o phi
GaugeDelta pullback_delta(const AlgebroidPtr& E, const Connection& conn,
                          const Section& nu, const FieldConfig& cfg, const Vec& x) {
    FieldConfig c2 = cfg;
    c2.eps.clear();
    for (int a = 0; a < E->r(); ++a)
        c2.eps.push_back(compose_with_phi(nu.comp[a], cfg));
    return gauge_delta(E, conn, c2, x);
}

// exact nested variation of the gauge field: the mu-variation of
// delta_{nu o phi} A, obtained from the chain rule through (phi, dphi, A)
Mat second_variation(const AlgebroidPtr& E, const Connection& conn,
                     const Section& mu, const Section& nu, const FieldConfig& cfg,
                     const Vec& x) {
    int n = E->n(), r = E->r(), d = cfg.d;
    Vec y = cfg.phi_value(x);
    Mat J = dphi_at(cfg, x);
    EConnOnE Gb = basic_on_E(conn);
    std::vector<ScalarField> dn = cov_deriv(conn, nu);

    // delta_{nu o phi} A^a_lam = P^a_c(phi) A^c_lam - (nabla nu)^a_i(phi) d_lam phi^i
    std::vector<ScalarField> P(static_cast<size_t>(r) * r,
                               ScalarField::constant(n, 0.0));
    for (int a = 0; a < r; ++a)
        for (int c = 0; c < r; ++c) {
            ScalarField acc = ScalarField::constant(n, 0.0);
            for (int b = 0; b < r; ++b) acc = acc + Gb.G(a, b, c) * nu.comp[b];
            P[static_cast<size_t>(a) * r + c] = acc;
        }

    GaugeDelta dm = pullback_delta(E, conn, mu, cfg, x);
    std::vector<ScalarField> rmu(n, ScalarField::constant(n, 0.0));
    for (int i = 0; i < n; ++i) {
        ScalarField acc = ScalarField::constant(n, 0.0);
        for (int b = 0; b < r; ++b) acc = acc + E->rho(b, i) * mu.comp[b];
        rmu[i] = acc;
    }
    // d_lam(delta_mu phi^i) = -d_k(rho^i_b mu^b)(phi) d_lam phi^k
    Mat ddphi = Mat::Zero(n, d);
    for (int i = 0; i < n; ++i)
        for (int lam = 0; lam < d; ++lam)
            for (int k = 0; k < n; ++k)
                ddphi(i, lam) -= rmu[i].diff(k).value(y) * J(k, lam);

    Mat out = Mat::Zero(r, d);
    for (int a = 0; a < r; ++a)
        for (int lam = 0; lam < d; ++lam) {
            double acc = 0.0;
            for (int c = 0; c < r; ++c) {
                for (int j = 0; j < n; ++j)
                    acc += P[static_cast<size_t>(a) * r + c].diff(j).value(y) *
                           dm.phi[j] * cfg.a(c, lam).value(x);
                acc += P[static_cast<size_t>(a) * r + c].value(y) * dm.A(c, lam);
            }
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j)
                    acc -= dn[static_cast<size_t>(a) * n + i].diff(j).value(y) *
                           dm.phi[j] * J(i, lam);
                acc -= dn[static_cast<size_t>(a) * n + i].value(y) * ddphi(i, lam);
            }
            out(a, lam) = acc;
        }
    return out;
}

}  // namespace

Mat nested_gauge_curvature(const AlgebroidPtr& E, const Connection& conn,
                           const Section& mu, const Section& nu,
                           const FieldConfig& cfg, const Vec& x) {
    require_sizes(E, cfg);
    int n = E->n(), r = E->r(), d = cfg.d;
    Vec y = phi_at(E, cfg, x);
    Mat D = minimal_coupling(E, cfg, x);
    FieldTable S = basic_curvature(conn);

    Mat K = second_variation(E, conn, mu, nu, cfg, x) -
            second_variation(E, conn, nu, mu, cfg, x);
    Section br = bracket(*E, mu, nu);
    Mat res = K + pullback_delta(E, conn, br, cfg, x).A;
    for (int a = 0; a < r; ++a)
        for (int lam = 0; lam < d; ++lam)
            for (int b = 0; b < r; ++b)
                for (int c = 0; c < r; ++c)
                    for (int i = 0; i < n; ++i)
                        res(a, lam) += S.at({a, b, c, i}).value(y) *
                                       mu.comp[b].value(y) * nu.comp[c].value(y) *
                                       D(i, lam);
    return res;
}

Vec pre_bracket(const AlgebroidPtr& E, const std::vector<ScalarField>& theta,
                const std::vector<ScalarField>& eps, const FieldConfig& cfg,
                const Vec& x) {
    int r = E->r();
    if (theta.size() != static_cast<size_t>(r) || eps.size() != static_cast<size_t>(r))
        throw UsageError("pre_bracket: parameter tables have wrong size");
    Vec y = phi_at(E, cfg, x);
    Vec out = Vec::Zero(r);
    for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b)
            for (int c = 0; c < r; ++c)
                out[a] += theta[b].value(x) * eps[c].value(x) * E->C(b, c, a).value(y);
    return out;
}

FieldConfig redefine_fields(const AlgebroidPtr& E, const Redef& rd,
                            const FieldConfig& cfg) {
    require_sizes(E, cfg);
    int n = E->n(), r = E->r(), d = cfg.d;
    LambdaFields lf = lambda_fields(E, rd);
    FieldConfig out;
    out.d = d;
    out.phi = cfg.phi;
    out.eps = cfg.eps;
    out.A.assign(static_cast<size_t>(r) * d, ScalarField::constant(d, 0.0));
    for (int a = 0; a < r; ++a)
        for (int mu = 0; mu < d; ++mu) {
            ScalarField acc = ScalarField::constant(d, 0.0);
            for (int b = 0; b < r; ++b)
                acc = acc + compose_with_phi(lf.L[static_cast<size_t>(a) * r + b], cfg) *
                          cfg.a(b, mu);
            for (int i = 0; i < n; ++i)
                acc = acc + compose_with_phi(rd.l(a, i), cfg) * cfg.phi[i].diff(mu);
            out.A[static_cast<size_t>(a) * d + mu] = acc;
        }
    return out;
}

}  // namespace cymh
