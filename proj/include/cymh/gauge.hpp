#pragma once

// Gauge-theory structural data on a Lie algebroid chart: compatibility
// conditions, the field-redefinition group action and its invariants, the
// obstruction representative on Lie algebra bundles, the extension
// construction, and flattening of tangent-algebroid connections.

#include "cymh/connection.hpp"

namespace cymh {

/// Fibre metrics: kappa on E (r x r, row-major) and g on TN (n x n).
struct Metric {
    std::vector<ScalarField> kappa;
    std::vector<ScalarField> g;

    const ScalarField& k(int r, int a, int b) const { return kappa[a * r + b]; }
    const ScalarField& gm(int n, int i, int j) const { return g[i * n + j]; }
};

/// Validates symmetry (to 1e-12) and positive definiteness (Cholesky) of
/// both metrics at the given points; throws UsageError on failure.
Metric make_metric(const AlgebroidPtr& E, std::vector<ScalarField> kappa,
                   std::vector<ScalarField> g, const std::vector<Vec>& pts);

Metric euclidean_metric(const AlgebroidPtr& E);

/// The full structural data of a gauge theory: algebroid, connection, the
/// 2-form primitive of the curvature, and the metrics. The aggregate itself
/// performs no validation (negative tests rely on this); use checked().
struct GaugeData {
    AlgebroidPtr E;
    Connection conn;
    PQForm zeta;  // (2,0) E-valued
    Metric metric;
};

struct CompatReport {
    double curvature_vs_zeta = 0.0;  // R + d_basic(zeta)
    double basic_curvature = 0.0;
    double kappa_parallel = 0.0;  // Leibniz defect of kappa under basic conn
    double g_parallel = 0.0;      // likewise for g
    double tol = 0.0;
    bool pass = false;
};

CompatReport compat_report(const GaugeData& data, const std::vector<Vec>& pts,
                           double tol);

/// Constructor-style gate: returns the data if compat_report passes, throws
/// UsageError otherwise.
GaugeData checked_gauge_data(GaugeData data, const std::vector<Vec>& pts, double tol);

/// Field-redefinition parameter lambda^a_i (a 1-form with values in E).
struct Redef {
    PQForm lambda;  // (1,0) E-valued

    const ScalarField& l(int a, int i) const { return lambda.comp(a, {i}, {}); }
};

Redef make_redef(const AlgebroidPtr& E, std::vector<ScalarField> lambda);
Redef zero_redef(const AlgebroidPtr& E);
Redef random_redef(const AlgebroidPtr& E, unsigned seed, double scale = 0.25);

struct LambdaOperators {
    Mat L;        // Lambda = 1_E - lambda rho
    Mat Lhat;     // 1_TN - rho lambda
    Mat Linv;
    Mat Lhatinv;
};

/// Evaluates the four operator matrices at a point. Throws
/// SingularSystemError when |det Lambda| < 1e-9.
LambdaOperators lambda_operators(const LieAlgebroid& E, const Redef& rd, const Vec& x);

/// Field-level operator matrices (row-major r x r and n x n entries plus
/// their inverses), shared by the redefinition formulas.
struct LambdaFields {
    std::vector<ScalarField> L, Lhat, Linv, Lhatinv;
};
LambdaFields lambda_fields(const AlgebroidPtr& E, const Redef& rd);

/// The redefined connection.
Connection redefine_connection(const Connection& conn, const Redef& rd);

/// kappa and g transported by (Linv, Linv) and (Lhatinv, Lhatinv).
Metric redefine_metrics(const Metric& m, const AlgebroidPtr& E, const Redef& rd);

/// The inhomogeneous term of the zeta redefinition.
PQForm zeta_hat(const Connection& conn, const Redef& rd);

/// zeta -> Lambda zeta (Lhatinv, Lhatinv) + zeta_hat.
PQForm redefine_zeta(const GaugeData& data, const Redef& rd);

/// Applies the redefinition to all four constituents.
GaugeData redefine(const GaugeData& data, const Redef& rd);

/// Re-bases all coefficient tables on per-point group evaluators. Values and
/// second-order jets are unchanged; symbolic derivatives of the result fall
/// back to jet extraction (exact to first order). Use this to keep
/// derivative tables of deeply composed data (redefined high-rank examples)
/// at a bounded expression size.
GaugeData compactify(const GaugeData& data);

/// Group law: applying `first` then `second` equals applying the composite.
Redef compose_lambda(const AlgebroidPtr& E, const Redef& first, const Redef& second);

/// The inverse parameter -Linv lambda.
Redef inverse_lambda(const AlgebroidPtr& E, const Redef& rd);

/// Residuals of the curvature-change formulas under conn -> conn + I, where
/// I^b_{a,i} is stored like a connection coefficient table [(a*n+i)*r+b].
struct CurvatureShiftReport {
    double bundle_residual = 0.0;  // R' - R - dI - I^I
    double basic_residual = 0.0;   // S' - S + d_basic I + I^(rho I)
};
CurvatureShiftReport curvature_shift(const Connection& conn,
                                     const std::vector<ScalarField>& I,
                                     const std::vector<Vec>& pts);

/// Obstruction representative of a zero-anchor (LAB) gauge theory.
struct ObstructionReport {
    PQForm rep;              // d_nabla(zeta), a (3,0) E-valued form
    double rep_norm = 0.0;   // max component magnitude at the points
    double centre_residual = 0.0;  // [rep, e_a] fibre-bracket defect
    double closedness = 0.0;       // d_nabla(rep) magnitude
};
ObstructionReport obstruction_rep(const GaugeData& data, const std::vector<Vec>& pts);

/// LAB gauge theory K = R^3 x (u(1) + su(2)) with flat connection, block
/// metric and zeta = x2 dx0^dx1 (x) t: its obstruction representative is a
/// unit volume form with values in the u(1) centre.
GaugeData canonical_nonclassical_example();

/// Lie algebroid on TN + K built from a zero-anchor algebroid K, a Lie
/// derivation law nabla and a curvature primitive zeta'. Validates the three
/// preconditions (derivation law, R = ad o zeta', closedness) and the
/// resulting axioms; throws UsageError with the offending residual otherwise.
AlgebroidPtr extension_algebroid(const AlgebroidPtr& K, const Connection& conn,
                                 const PQForm& zeta_prime, double tol = 1e-8);

/// For a tangent-algebroid connection with vanishing basic curvature:
/// the redefinition parameter that makes the connection flat, built by
/// parallel transport of the frame along axis-aligned paths from the origin.
Redef flatten_tangent(const Connection& conn, double step = 1e-2);

/// Orthonormal basis (columns) of the centre of the basic connection at x:
/// nullspace of nu -> (rho(nu), nabla^bas_nu e_b, nabla^bas_nu d_i).
Mat centre_basic(const Connection& conn, const Vec& x, double threshold = 1e-9);

/// Block-diagonal product theory on the direct product algebroid.
GaugeData direct_product(const GaugeData& d1, const GaugeData& d2);

}  // namespace cymh
