#include "cymh/connection.hpp"

#include <cmath>

namespace cymh {

namespace {

// p-tuples over {0..base-1} encoded as base-`base` integers, first slot most
// significant.
std::vector<int> decode(int code, int len, int base) {
    std::vector<int> idx(len);
    for (int t = len - 1; t >= 0; --t) {
        idx[t] = code % base;
        code /= base;
    }
    return idx;
}

int parity_sign(int t) { return (t % 2 == 0) ? 1 : -1; }

std::vector<int> erase_at(const std::vector<int>& idx, int t) {
    std::vector<int> out = idx;
    out.erase(out.begin() + t);
    return out;
}

}  // namespace

int ipow(int base, int exp) {
    int out = 1;
    for (int k = 0; k < exp; ++k) out *= base;
    return out;
}

FieldTable::FieldTable(std::vector<int> dims, int chart_dim) : dims_(std::move(dims)) {
    size_t total = 1;
    for (int d : dims_) total *= static_cast<size_t>(d);
    f_.assign(total, ScalarField::constant(chart_dim, 0.0));
}

size_t FieldTable::flat(const std::vector<int>& idx) const {
    if (idx.size() != dims_.size()) throw UsageError("FieldTable: wrong index arity");
    size_t out = 0;
    for (size_t k = 0; k < idx.size(); ++k) {
        if (idx[k] < 0 || idx[k] >= dims_[k]) throw UsageError("FieldTable: index out of range");
        out = out * static_cast<size_t>(dims_[k]) + static_cast<size_t>(idx[k]);
    }
    return out;
}

ScalarField& FieldTable::at(const std::vector<int>& idx) { return f_[flat(idx)]; }
const ScalarField& FieldTable::at(const std::vector<int>& idx) const { return f_[flat(idx)]; }

Connection::Connection(AlgebroidPtr E, std::vector<ScalarField> omega)
    : E_(std::move(E)), omega_(std::move(omega)) {
    if (omega_.size() != static_cast<size_t>(E_->r()) * E_->r() * E_->n())
        throw UsageError("Connection: coefficient table has wrong size");
    for (const auto& f : omega_)
        if (!f.valid() || f.dim() != E_->n())
            throw UsageError("Connection: coefficient field on wrong chart");
}

Connection Connection::flat(AlgebroidPtr E) {
    std::vector<ScalarField> omega(
        static_cast<size_t>(E->r()) * E->r() * E->n(),
        ScalarField::constant(E->n(), 0.0));
    return Connection(std::move(E), std::move(omega));
}

EConnOnE::EConnOnE(AlgebroidPtr E, std::vector<ScalarField> gamma)
    : E_(std::move(E)), gamma_(std::move(gamma)) {
    if (gamma_.size() != static_cast<size_t>(E_->r()) * E_->r() * E_->r())
        throw UsageError("EConnOnE: coefficient table has wrong size");
}

EConnOnTN::EConnOnTN(AlgebroidPtr E, std::vector<ScalarField> beta)
    : E_(std::move(E)), beta_(std::move(beta)) {
    if (beta_.size() != static_cast<size_t>(E_->r()) * E_->n() * E_->n())
        throw UsageError("EConnOnTN: coefficient table has wrong size");
}

PQForm::PQForm(AlgebroidPtr E, int p, int q, ValueKind kind,
               std::vector<ScalarField> comps)
    : E_(std::move(E)), p_(p), q_(q), kind_(kind), comps_(std::move(comps)) {
    if (p < 0 || q < 0 || p > 4 || q > 4)
        throw UsageError("PQForm: slot counts must lie in 0..4");
    size_t expect = static_cast<size_t>(vdim()) * ipow(E_->n(), p) * ipow(E_->r(), q);
    if (comps_.size() != expect) throw UsageError("PQForm: component table has wrong size");
}

int PQForm::vdim() const {
    switch (kind_) {
        case ValueKind::Scalar: return 1;
        case ValueKind::EValued: return E_->r();
        case ValueKind::TNValued: return E_->n();
    }
    throw UsageError("unreachable");
}

const ScalarField& PQForm::comp(int v, const std::vector<int>& I,
                                const std::vector<int>& A) const {
    if (static_cast<int>(I.size()) != p_ || static_cast<int>(A.size()) != q_)
        throw UsageError("PQForm: wrong slot arity");
    size_t icode = 0;
    for (int i : I) icode = icode * E_->n() + static_cast<size_t>(i);
    size_t acode = 0;
    for (int a : A) acode = acode * E_->r() + static_cast<size_t>(a);
    return comps_[(static_cast<size_t>(v) * ipow(E_->n(), p_) + icode) * ipow(E_->r(), q_) +
                  acode];
}

double PQForm::antisymmetry_defect(const std::vector<Vec>& pts) const {
    double worst = 0.0;
    int n = E_->n(), r = E_->r();
    for (const Vec& x : pts) {
        for (int v = 0; v < vdim(); ++v) {
            for (int icode = 0; icode < ipow(n, p_); ++icode) {
                auto I = decode(icode, p_, n);
                for (int acode = 0; acode < ipow(r, q_); ++acode) {
                    auto A = decode(acode, q_, r);
                    double val = comp(v, I, A).value(x);
                    // swap adjacent slots within each group
                    for (int t = 0; t + 1 < p_; ++t) {
                        auto J = I;
                        std::swap(J[t], J[t + 1]);
                        worst = std::max(worst, std::abs(val + comp(v, J, A).value(x)));
                    }
                    for (int t = 0; t + 1 < q_; ++t) {
                        auto B = A;
                        std::swap(B[t], B[t + 1]);
                        worst = std::max(worst, std::abs(val + comp(v, I, B).value(x)));
                    }
                }
            }
        }
    }
    return worst;
}

PQForm PQForm::checked(AlgebroidPtr E, int p, int q, ValueKind kind,
                       std::vector<ScalarField> comps, const std::vector<Vec>& pts,
                       double tol) {
    PQForm w(std::move(E), p, q, kind, std::move(comps));
    double defect = w.antisymmetry_defect(pts);
    if (defect > tol) throw UsageError("PQForm: antisymmetry defect above tolerance");
    return w;
}

PQForm PQForm::zero(AlgebroidPtr E, int p, int q, ValueKind kind) {
    int n = E->n(), r = E->r();
    int v = (kind == ValueKind::Scalar) ? 1 : (kind == ValueKind::EValued ? r : n);
    std::vector<ScalarField> comps(
        static_cast<size_t>(v) * ipow(n, p) * ipow(r, q),
        ScalarField::constant(n, 0.0));
    return PQForm(std::move(E), p, q, kind, std::move(comps));
}

EConnOnE nabla_rho(const Connection& conn) {
    const auto& E = conn.algebroid();
    int n = E->n(), r = E->r();
    std::vector<ScalarField> gamma(static_cast<size_t>(r) * r * r,
                                   ScalarField::constant(n, 0.0));
    for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b)
            for (int c = 0; c < r; ++c) {
                ScalarField acc = ScalarField::constant(n, 0.0);
                for (int i = 0; i < n; ++i) acc = acc + E->rho(a, i) * conn.om(c, b, i);
                gamma[(static_cast<size_t>(a) * r + b) * r + c] = acc;
            }
    return EConnOnE(E, std::move(gamma));
}

EConnOnE basic_on_E(const Connection& conn) {
    const auto& E = conn.algebroid();
    int n = E->n(), r = E->r();
    std::vector<ScalarField> gamma(static_cast<size_t>(r) * r * r,
                                   ScalarField::constant(n, 0.0));
    for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b)
            for (int c = 0; c < r; ++c) {
                ScalarField acc = E->C(a, b, c);
                for (int i = 0; i < n; ++i) acc = acc + E->rho(b, i) * conn.om(c, a, i);
                gamma[(static_cast<size_t>(a) * r + b) * r + c] = acc;
            }
    return EConnOnE(E, std::move(gamma));
}

EConnOnTN basic_on_TN(const Connection& conn) {
    const auto& E = conn.algebroid();
    int n = E->n(), r = E->r();
    std::vector<ScalarField> beta(static_cast<size_t>(r) * n * n,
                                  ScalarField::constant(n, 0.0));
    for (int a = 0; a < r; ++a)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                ScalarField acc = -E->rho(a, j).diff(i);
                for (int b = 0; b < r; ++b) acc = acc + conn.om(b, a, i) * E->rho(b, j);
                beta[(static_cast<size_t>(a) * n + i) * n + j] = acc;
            }
    return EConnOnTN(E, std::move(beta));
}

EConnOnE conjugate(const EConnOnE& econn) {
    const auto& E = econn.algebroid();
    int r = E->r();
    std::vector<ScalarField> gamma(static_cast<size_t>(r) * r * r,
                                   ScalarField::constant(E->n(), 0.0));
    for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b)
            for (int c = 0; c < r; ++c)
                gamma[(static_cast<size_t>(a) * r + b) * r + c] =
                    E->C(a, b, c) + econn.G(c, b, a);
    return EConnOnE(E, std::move(gamma));
}

PQForm e_torsion(const EConnOnE& econn) {
    const auto& E = econn.algebroid();
    int r = E->r();
    std::vector<ScalarField> comps(static_cast<size_t>(r) * r * r,
                                   ScalarField::constant(E->n(), 0.0));
    for (int c = 0; c < r; ++c)
        for (int a = 0; a < r; ++a)
            for (int b = 0; b < r; ++b)
                comps[(static_cast<size_t>(c) * r + a) * r + b] =
                    econn.G(c, a, b) - econn.G(c, b, a) - E->C(a, b, c);
    return PQForm(E, 0, 2, ValueKind::EValued, std::move(comps));
}

FieldTable curvature(const Connection& conn) {
    const auto& E = conn.algebroid();
    int n = E->n(), r = E->r();
    FieldTable R({r, r, n, n}, n);
    for (int b = 0; b < r; ++b)
        for (int a = 0; a < r; ++a)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    ScalarField acc = conn.om(b, a, j).diff(i) - conn.om(b, a, i).diff(j);
                    for (int c = 0; c < r; ++c)
                        acc = acc + conn.om(c, a, j) * conn.om(b, c, i) -
                              conn.om(c, a, i) * conn.om(b, c, j);
                    R.at({b, a, i, j}) = acc;
                }
    return R;
}

FieldTable e_curvature(const EConnOnE& econn) {
    const auto& E = econn.algebroid();
    int n = E->n(), r = E->r();
    FieldTable R({r, r, r, r}, n);  // [d][c][a][b]
    for (int d = 0; d < r; ++d)
        for (int c = 0; c < r; ++c)
            for (int a = 0; a < r; ++a)
                for (int b = 0; b < r; ++b) {
                    ScalarField acc = ScalarField::constant(n, 0.0);
                    for (int k = 0; k < n; ++k)
                        acc = acc + E->rho(a, k) * econn.G(d, b, c).diff(k) -
                              E->rho(b, k) * econn.G(d, a, c).diff(k);
                    for (int e = 0; e < r; ++e)
                        acc = acc + econn.G(e, b, c) * econn.G(d, a, e) -
                              econn.G(e, a, c) * econn.G(d, b, e) -
                              E->C(a, b, e) * econn.G(d, e, c);
                    R.at({d, c, a, b}) = acc;
                }
    return R;
}

FieldTable e_curvature_tn(const EConnOnTN& econn) {
    const auto& E = econn.algebroid();
    int n = E->n(), r = E->r();
    FieldTable R({n, n, r, r}, n);  // [j][i][a][b]
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            for (int a = 0; a < r; ++a)
                for (int b = 0; b < r; ++b) {
                    ScalarField acc = ScalarField::constant(n, 0.0);
                    for (int k = 0; k < n; ++k)
                        acc = acc + E->rho(a, k) * econn.B(j, b, i).diff(k) -
                              E->rho(b, k) * econn.B(j, a, i).diff(k) +
                              econn.B(k, b, i) * econn.B(j, a, k) -
                              econn.B(k, a, i) * econn.B(j, b, k);
                    for (int e = 0; e < r; ++e)
                        acc = acc - E->C(a, b, e) * econn.B(j, e, i);
                    R.at({j, i, a, b}) = acc;
                }
    return R;
}

FieldTable basic_curvature(const Connection& conn) {
    const auto& E = conn.algebroid();
    int n = E->n(), r = E->r();
    EConnOnTN Bc = basic_on_TN(conn);
    FieldTable S({r, r, r, n}, n);  // [c][a][b][i]
    for (int c = 0; c < r; ++c)
        for (int a = 0; a < r; ++a)
            for (int b = 0; b < r; ++b)
                for (int i = 0; i < n; ++i) {
                    ScalarField acc = E->C(a, b, c).diff(i);
                    for (int d = 0; d < r; ++d)
                        acc = acc + E->C(a, b, d) * conn.om(c, d, i) -
                              conn.om(d, a, i) * E->C(d, b, c) -
                              conn.om(d, b, i) * E->C(a, d, c);
                    for (int j = 0; j < n; ++j)
                        acc = acc + E->rho(b, j) * conn.om(c, a, i).diff(j) -
                              E->rho(a, j) * conn.om(c, b, i).diff(j) -
                              Bc.B(j, b, i) * conn.om(c, a, j) +
                              Bc.B(j, a, i) * conn.om(c, b, j);
                    S.at({c, a, b, i}) = acc;
                }
    return S;
}

PQForm d_nabla(const PQForm& w, const Connection& conn) {
    const auto& E = w.algebroid();
    if (conn.algebroid().get() != E.get()) throw UsageError("d_nabla: algebroid mismatch");
    if (w.kind() == ValueKind::TNValued)
        throw UsageError("d_nabla: TN-valued forms are not supported");
    int n = E->n(), r = E->r();
    int p = w.p(), q = w.q();
    if (p + 1 > 4) throw UsageError("d_nabla: form degree cap exceeded");
    int vdim = w.vdim();

    std::vector<ScalarField> comps;
    comps.reserve(static_cast<size_t>(vdim) * ipow(n, p + 1) * ipow(r, q));
    for (int v = 0; v < vdim; ++v)
        for (int icode = 0; icode < ipow(n, p + 1); ++icode) {
            auto I1 = decode(icode, p + 1, n);
            for (int acode = 0; acode < ipow(r, q); ++acode) {
                auto A = decode(acode, q, r);
                ScalarField acc = ScalarField::constant(n, 0.0);
                for (int t = 0; t <= p; ++t) {
                    int it = I1[t];
                    auto I = erase_at(I1, t);
                    ScalarField term = w.comp(v, I, A).diff(it);
                    if (w.kind() == ValueKind::EValued)
                        for (int d = 0; d < r; ++d)
                            term = term + conn.om(v, d, it) * w.comp(d, I, A);
                    for (int j = 0; j < q; ++j) {
                        auto Ad = A;
                        for (int d = 0; d < r; ++d) {
                            Ad[j] = d;
                            term = term - conn.om(d, A[j], it) * w.comp(v, I, Ad);
                        }
                        Ad[j] = A[j];
                    }
                    acc = acc + parity_sign(t) * term;
                }
                comps.push_back(acc);
            }
        }
    return PQForm(E, p + 1, q, w.kind(), std::move(comps));
}

PQForm d_basic(const PQForm& w, const Connection& conn) {
    const auto& E = w.algebroid();
    if (conn.algebroid().get() != E.get()) throw UsageError("d_basic: algebroid mismatch");
    if (w.kind() != ValueKind::EValued)
        throw UsageError("d_basic: only E-valued forms are supported");
    int n = E->n(), r = E->r();
    int p = w.p(), q = w.q();
    if (q + 1 > 4) throw UsageError("d_basic: form degree cap exceeded");
    EConnOnE G = basic_on_E(conn);
    EConnOnTN B = basic_on_TN(conn);

    std::vector<ScalarField> comps;
    comps.reserve(static_cast<size_t>(r) * ipow(n, p) * ipow(r, q + 1));
    for (int v = 0; v < r; ++v)
        for (int icode = 0; icode < ipow(n, p); ++icode) {
            auto I = decode(icode, p, n);
            for (int acode = 0; acode < ipow(r, q + 1); ++acode) {
                auto A1 = decode(acode, q + 1, r);
                ScalarField acc = ScalarField::constant(n, 0.0);
                for (int t = 0; t <= q; ++t) {
                    int at = A1[t];
                    auto A = erase_at(A1, t);
                    ScalarField term = ScalarField::constant(n, 0.0);
                    for (int d = 0; d < r; ++d)
                        term = term + G.G(v, at, d) * w.comp(d, I, A);
                    for (int k = 0; k < n; ++k)
                        term = term + E->rho(at, k) * w.comp(v, I, A).diff(k);
                    for (int j = 0; j < p; ++j) {
                        auto Ik = I;
                        for (int k = 0; k < n; ++k) {
                            Ik[j] = k;
                            term = term - B.B(k, at, I[j]) * w.comp(v, Ik, A);
                        }
                        Ik[j] = I[j];
                    }
                    acc = acc + parity_sign(t) * term;
                }
                for (int s = 0; s <= q; ++s)
                    for (int t = s + 1; t <= q; ++t) {
                        auto A = erase_at(erase_at(A1, t), s);
                        A.insert(A.begin(), 0);
                        for (int d = 0; d < r; ++d) {
                            A[0] = d;
                            acc = acc + parity_sign(s + t) * E->C(A1[s], A1[t], d) *
                                            w.comp(v, I, A);
                        }
                    }
                comps.push_back(acc);
            }
        }
    return PQForm(E, p, q + 1, ValueKind::EValued, std::move(comps));
}

PQForm d_econn(const PQForm& w, const EConnOnE& econn) {
    const auto& E = w.algebroid();
    if (econn.algebroid().get() != E.get()) throw UsageError("d_econn: algebroid mismatch");
    if (w.kind() != ValueKind::EValued || w.p() != 0)
        throw UsageError("d_econn: expects (0,q) E-valued forms");
    int n = E->n(), r = E->r();
    int q = w.q();
    if (q + 1 > 4) throw UsageError("d_econn: form degree cap exceeded");

    std::vector<ScalarField> comps;
    comps.reserve(static_cast<size_t>(r) * ipow(r, q + 1));
    std::vector<int> I0;
    for (int v = 0; v < r; ++v)
        for (int acode = 0; acode < ipow(r, q + 1); ++acode) {
            auto A1 = decode(acode, q + 1, r);
            ScalarField acc = ScalarField::constant(n, 0.0);
            for (int t = 0; t <= q; ++t) {
                int at = A1[t];
                auto A = erase_at(A1, t);
                ScalarField term = ScalarField::constant(n, 0.0);
                for (int d = 0; d < r; ++d)
                    term = term + econn.G(v, at, d) * w.comp(d, I0, A);
                for (int k = 0; k < n; ++k)
                    term = term + E->rho(at, k) * w.comp(v, I0, A).diff(k);
                acc = acc + parity_sign(t) * term;
            }
            for (int s = 0; s <= q; ++s)
                for (int t = s + 1; t <= q; ++t) {
                    auto A = erase_at(erase_at(A1, t), s);
                    A.insert(A.begin(), 0);
                    for (int d = 0; d < r; ++d) {
                        A[0] = d;
                        acc = acc + parity_sign(s + t) * E->C(A1[s], A1[t], d) *
                                        w.comp(v, I0, A);
                    }
                }
            comps.push_back(acc);
        }
    return PQForm(E, 0, q + 1, ValueKind::EValued, std::move(comps));
}

Connection parallel_frame_connection(AlgebroidPtr tangent_E,
                                     const std::vector<ScalarField>& P) {
    const auto& E = tangent_E;
    int n = E->n();
    if (E->r() != n) throw UsageError("parallel_frame_connection: expects a tangent algebroid");
    if (P.size() != static_cast<size_t>(n) * n)
        throw UsageError("parallel_frame_connection: frame has wrong size");
    auto Pinv = matrix_inverse_fields(P, n);
    // omega^c_ai = -sum_m (d_a P^c_m) (P^{-1})^m_i
    std::vector<ScalarField> omega(static_cast<size_t>(n) * n * n,
                                   ScalarField::constant(n, 0.0));
    for (int a = 0; a < n; ++a)
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < n; ++c) {
                ScalarField acc = ScalarField::constant(n, 0.0);
                for (int m = 0; m < n; ++m)
                    acc = acc - P[static_cast<size_t>(c) * n + m].diff(a) *
                                    Pinv[static_cast<size_t>(m) * n + i];
                omega[(static_cast<size_t>(a) * n + i) * n + c] = acc;
            }
    return Connection(E, std::move(omega));
}

}  // namespace cymh
