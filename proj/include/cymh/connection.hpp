#pragma once

// Connections on a Lie algebroid chart: vector-bundle connections on E,
// E-connections on E and on TN, mixed (p,q)-forms and the three exterior
// covariant derivatives, plus torsion and curvature tables.

#include "cymh/algebroid.hpp"

namespace cymh {

/// Dense table of scalar fields with named index extents.
class FieldTable {
public:
    FieldTable() = default;
    FieldTable(std::vector<int> dims, int chart_dim);

    const std::vector<int>& dims() const { return dims_; }
    ScalarField& at(const std::vector<int>& idx);
    const ScalarField& at(const std::vector<int>& idx) const;
    size_t size() const { return f_.size(); }

private:
    size_t flat(const std::vector<int>& idx) const;
    std::vector<int> dims_;
    std::vector<ScalarField> f_;
};

/// Vector-bundle connection on E over the base: coefficients w(b,a,i) =
/// omega^b_ai, i.e. nabla_{d_i} e_a = omega^b_ai e_b.
class Connection {
public:
    Connection(AlgebroidPtr E, std::vector<ScalarField> omega);

    const AlgebroidPtr& algebroid() const { return E_; }
    /// omega^b_ai
    const ScalarField& om(int b, int a, int i) const {
        return omega_[(static_cast<size_t>(a) * E_->n() + i) * E_->r() + b];
    }

    static Connection flat(AlgebroidPtr E);

private:
    AlgebroidPtr E_;
    std::vector<ScalarField> omega_;  // [(a*n + i)*r + b]
};

/// E-connection on E: coefficients G(c,a,b) = Gamma^c_ab with
/// econn_{e_a} e_b = Gamma^c_ab e_c.
class EConnOnE {
public:
    EConnOnE(AlgebroidPtr E, std::vector<ScalarField> gamma);

    const AlgebroidPtr& algebroid() const { return E_; }
    const ScalarField& G(int c, int a, int b) const {
        return gamma_[(static_cast<size_t>(a) * E_->r() + b) * E_->r() + c];
    }

private:
    AlgebroidPtr E_;
    std::vector<ScalarField> gamma_;  // [(a*r + b)*r + c]
};

/// E-connection on TN: coefficients B(j,a,i) = B^j_ai with
/// econn_{e_a} d_i = B^j_ai d_j.
class EConnOnTN {
public:
    EConnOnTN(AlgebroidPtr E, std::vector<ScalarField> beta);

    const AlgebroidPtr& algebroid() const { return E_; }
    const ScalarField& B(int j, int a, int i) const {
        return beta_[(static_cast<size_t>(a) * E_->n() + i) * E_->n() + j];
    }

private:
    AlgebroidPtr E_;
    std::vector<ScalarField> beta_;  // [(a*n + i)*n + j]
};

enum class ValueKind { Scalar, EValued, TNValued };

/// Mixed form with p antisymmetric TN slots, q antisymmetric E slots and a
/// scalar, E- or TN-valued value. Components are stored densely:
/// comp(v, (i1..ip), (a1..aq)).
class PQForm {
public:
    PQForm(AlgebroidPtr E, int p, int q, ValueKind kind, std::vector<ScalarField> comps);

    const AlgebroidPtr& algebroid() const { return E_; }
    int p() const { return p_; }
    int q() const { return q_; }
    ValueKind kind() const { return kind_; }
    int vdim() const;

    const ScalarField& comp(int v, const std::vector<int>& I,
                            const std::vector<int>& A) const;

    /// Max antisymmetry defect over the sample points (both slot groups).
    double antisymmetry_defect(const std::vector<Vec>& pts) const;

    /// Builder that also validates antisymmetry at the given points.
    static PQForm checked(AlgebroidPtr E, int p, int q, ValueKind kind,
                          std::vector<ScalarField> comps, const std::vector<Vec>& pts,
                          double tol = 1e-12);

    static PQForm zero(AlgebroidPtr E, int p, int q, ValueKind kind);

private:
    AlgebroidPtr E_;
    int p_, q_;
    ValueKind kind_;
    std::vector<ScalarField> comps_;  // ((v * n^p + I) * r^q + A)
};

int ipow(int base, int exp);

/// nabla^rho: Gamma^c_ab = rho^i_a omega^c_bi.
EConnOnE nabla_rho(const Connection& conn);

/// Basic connection on E: Gamma^c_ab = C^c_ab + rho^i_b omega^c_ai.
EConnOnE basic_on_E(const Connection& conn);

/// Basic connection on TN: B^j_ai = -d_i rho^j_a + omega^b_ai rho^j_b.
EConnOnTN basic_on_TN(const Connection& conn);

/// Conjugate E-connection: Gamma^c_ab -> C^c_ab + Gamma^c_ba.
EConnOnE conjugate(const EConnOnE& econn);

/// Torsion t^c_ab = Gamma^c_ab - Gamma^c_ba - C^c_ab as a (0,2) E-valued form.
PQForm e_torsion(const EConnOnE& econn);

/// Curvature of the bundle connection: R^b_{a,ij} as table [b][a][i][j].
FieldTable curvature(const Connection& conn);

/// Curvature of an E-connection on E: table [d][c][a][b] with
/// R(e_a,e_b)e_c = R^d_{c;ab} e_d.
FieldTable e_curvature(const EConnOnE& econn);

/// Curvature of an E-connection on TN: table [j][i][a][b] with
/// R(e_a,e_b)d_i = R^j_{i;ab} d_j.
FieldTable e_curvature_tn(const EConnOnTN& econn);

/// Basic curvature S^c_{ab,i} as table [c][a][b][i].
FieldTable basic_curvature(const Connection& conn);

/// Exterior covariant derivative along TN slots (scalar or E-valued forms).
PQForm d_nabla(const PQForm& w, const Connection& conn);

/// Exterior covariant derivative along E slots with the basic connections
/// (E-valued forms).
PQForm d_basic(const PQForm& w, const Connection& conn);

/// Exterior covariant derivative of a (0,q) E-valued form along a given
/// E-connection on E (with Lie-bracket terms).
PQForm d_econn(const PQForm& w, const EConnOnE& econn);

/// On a tangent algebroid: the unique connection for which the given
/// invertible frame P (columns P^b_m, row-major n x n) is parallel for the
/// basic connection. Its basic curvature vanishes identically while the
/// bundle curvature is generically nonzero.
Connection parallel_frame_connection(AlgebroidPtr tangent_E,
                                     const std::vector<ScalarField>& P);

}  // namespace cymh
