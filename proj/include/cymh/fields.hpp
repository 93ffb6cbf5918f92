#pragma once

// Pointwise field theory on a spacetime chart: minimal coupling, field
// strengths, the Lagrangian density, infinitesimal gauge transformations and
// their integrated flow, plus the bundle-level identities they satisfy.

#include "cymh/gauge.hpp"

namespace cymh {

/// Flat spacetime chart R^d with a constant metric eta.
struct Spacetime {
    int d = 2;
    Mat eta;
};

Spacetime euclidean_spacetime(int d = 2);

/// Higgs field phi (n components), gauge field A^a_mu (r x d, [a*d+mu]) and
/// gauge parameter eps^a, all ScalarFields on the spacetime chart.
struct FieldConfig {
    int d = 0;
    std::vector<ScalarField> phi;
    std::vector<ScalarField> A;
    std::vector<ScalarField> eps;

    const ScalarField& a(int idx, int mu) const { return A[idx * d + mu]; }
    /// Values of phi at the spacetime point x.
    Vec phi_value(const Vec& x) const;
};

/// Composes a base-chart field with the Higgs field: x -> f(phi(x)).
ScalarField compose_with_phi(const ScalarField& f, const FieldConfig& cfg);

/// Pullback connection coefficients Omega^a_{b,mu} = d_mu phi^i omega^a_{bi}(phi),
/// stored as [(a*r+b)*d + mu]. Throws DomainError if phi(x) leaves the chart.
std::vector<double> pullback_connection(const Connection& conn, const FieldConfig& cfg,
                                        const Vec& x);

/// Minimally coupled derivative (D phi)^i_mu = d_mu phi^i - rho^i_a(phi) A^a_mu,
/// returned as an n x d matrix.
Mat minimal_coupling(const AlgebroidPtr& E, const FieldConfig& cfg, const Vec& x);

/// Field strength F^a_{mu nu} (r antisymmetric d x d matrices).
std::vector<Mat> field_strength_F(const AlgebroidPtr& E, const Connection& conn,
                                  const FieldConfig& cfg, const Vec& x);

/// Extended field strength G = F + zeta(phi)(Dphi, Dphi).
std::vector<Mat> field_strength_G(const GaugeData& data, const FieldConfig& cfg,
                                  const Vec& x);

struct GaugeDelta {
    Vec phi;  // n
    Mat A;    // r x d
};

/// Infinitesimal gauge transformation of (phi, A) with parameter cfg.eps.
GaugeDelta gauge_delta(const AlgebroidPtr& E, const Connection& conn,
                       const FieldConfig& cfg, const Vec& x);

enum class FlowScheme { euler, rk4 };

/// One integration step of the gauge-flow ODE system; returns a new
/// configuration whose phi and A are fields on the same chart. Throws
/// DomainError if phi leaves the base chart during the step.
FieldConfig gauge_flow_step(const AlgebroidPtr& E, const Connection& conn,
                            const FieldConfig& cfg, double dt,
                            FlowScheme scheme = FlowScheme::rk4);

/// Gauge variation of the field strengths (right-hand sides of the structural
/// variation formulas; both vanish on compatible data).
std::vector<Mat> gauge_delta_F(const GaugeData& data, const FieldConfig& cfg,
                               const Vec& x);
std::vector<Mat> gauge_delta_G(const GaugeData& data, const FieldConfig& cfg,
                               const Vec& x);

/// Lagrangian density
///   -1/4 kappa_ab G^a_{mu nu} G^b_{rho sigma} eta^{mu rho} eta^{nu sigma}
///   + g_ij (Dphi)^i_mu (Dphi)^j_nu eta^{mu nu} - V(phi).
double lagrangian_density(const GaugeData& data, const Spacetime& st,
                          const ScalarField& V, const FieldConfig& cfg, const Vec& x);

/// Bianchi defect d^{phi*nabla} G + [A, G] - phi^!(d_nabla zeta) for
/// zero-anchor data, stored as [((a*d + mu)*d + nu)*d + sigma].
std::vector<double> bianchi_G_residual(const GaugeData& data, const FieldConfig& cfg,
                                       const Vec& x);

/// Residual of the nested gauge-transformation commutator on A against the
/// pullback of the basic curvature, for pullback parameters phi*mu, phi*nu.
Mat nested_gauge_curvature(const AlgebroidPtr& E, const Connection& conn,
                           const Section& mu, const Section& nu,
                           const FieldConfig& cfg, const Vec& x);

/// Parameter pre-bracket Delta^a = theta^b eps^c C^a_bc(phi) for parameters
/// with field-independent components.
Vec pre_bracket(const AlgebroidPtr& E, const std::vector<ScalarField>& theta,
                const std::vector<ScalarField>& eps, const FieldConfig& cfg,
                const Vec& x);

/// Field redefinition of the configuration: phi unchanged,
/// A -> Lambda(phi) A + lambda(phi) dphi.
FieldConfig redefine_fields(const AlgebroidPtr& E, const Redef& rd,
                            const FieldConfig& cfg);

}  // namespace cymh
