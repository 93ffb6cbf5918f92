#include "cymh/algebroid.hpp"

#include <cmath>
#include <sstream>

namespace cymh {

namespace {

double eps3(int i, int j, int k) {
    return static_cast<double>((i - j) * (j - k) * (k - i)) / 2.0;
}

}  // namespace

bool Box::contains(const Vec& x) const {
    if (x.size() != lo.size()) return false;
    for (int i = 0; i < x.size(); ++i)
        if (x[i] < lo[i] || x[i] > hi[i]) return false;
    return true;
}

Vec Box::sample(std::mt19937& rng) const {
    Vec x(lo.size());
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < lo.size(); ++i) {
        double margin = 0.05 * (hi[i] - lo[i]);
        x[i] = lo[i] + margin + (hi[i] - lo[i] - 2.0 * margin) * unif(rng);
    }
    return x;
}

LieAlgebroid::LieAlgebroid(int n, int r, std::vector<ScalarField> anchor,
                           std::vector<ScalarField> structure, Box domain,
                           std::string name)
    : n_(n), r_(r), anchor_(std::move(anchor)), structure_(std::move(structure)),
      domain_(std::move(domain)), name_(std::move(name)) {
    if (n <= 0 || r <= 0) throw UsageError("algebroid dimensions must be positive");
    if (anchor_.size() != static_cast<size_t>(n * r))
        throw UsageError("anchor table has wrong size");
    if (structure_.size() != static_cast<size_t>(r) * r * r)
        throw UsageError("structure table has wrong size");
    if (domain_.dim() != n) throw UsageError("domain dimension mismatch");
    for (const auto& f : anchor_)
        if (!f.valid() || f.dim() != n) throw UsageError("anchor field on wrong chart");
    for (const auto& f : structure_)
        if (!f.valid() || f.dim() != n) throw UsageError("structure field on wrong chart");
}

Section LieAlgebroid::zero_section() const {
    Section s;
    for (int a = 0; a < r_; ++a) s.comp.push_back(ScalarField::constant(n_, 0.0));
    return s;
}

Section LieAlgebroid::frame_section(int a) const {
    if (a < 0 || a >= r_) throw UsageError("frame index out of range");
    Section s;
    for (int b = 0; b < r_; ++b)
        s.comp.push_back(ScalarField::constant(n_, b == a ? 1.0 : 0.0));
    return s;
}

namespace {

ScalarField random_poly(int n, std::mt19937& rng) {
    std::uniform_real_distribution<double> coef(-0.6, 0.6);
    ScalarField f = ScalarField::constant(n, coef(rng));
    for (int i = 0; i < n; ++i) {
        f = f + coef(rng) * ScalarField::coordinate(n, i);
        for (int j = i; j < n; ++j)
            f = f + coef(rng) * ScalarField::coordinate(n, i) * ScalarField::coordinate(n, j);
    }
    return f;
}

}  // namespace

Section LieAlgebroid::random_section(std::mt19937& rng) const {
    Section s;
    for (int a = 0; a < r_; ++a) s.comp.push_back(random_poly(n_, rng));
    return s;
}

BaseVectorField LieAlgebroid::random_vector_field(std::mt19937& rng) const {
    BaseVectorField X;
    for (int i = 0; i < n_; ++i) X.comp.push_back(random_poly(n_, rng));
    return X;
}

std::vector<Vec> LieAlgebroid::sample_points(unsigned seed, int count) const {
    std::mt19937 rng(seed);
    std::vector<Vec> pts;
    pts.reserve(count);
    for (int k = 0; k < count; ++k) pts.push_back(domain_.sample(rng));
    return pts;
}

BaseVectorField anchor_apply(const LieAlgebroid& E, const Section& mu) {
    if (mu.rank() != E.r()) throw UsageError("section rank mismatch");
    BaseVectorField X;
    for (int i = 0; i < E.n(); ++i) {
        ScalarField acc = ScalarField::constant(E.n(), 0.0);
        for (int a = 0; a < E.r(); ++a) acc = acc + E.rho(a, i) * mu.comp[a];
        X.comp.push_back(acc);
    }
    return X;
}

Section bracket(const LieAlgebroid& E, const Section& mu, const Section& nu) {
    if (mu.rank() != E.r() || nu.rank() != E.r()) throw UsageError("section rank mismatch");
    Section out;
    for (int c = 0; c < E.r(); ++c) {
        ScalarField acc = ScalarField::constant(E.n(), 0.0);
        for (int a = 0; a < E.r(); ++a)
            for (int b = 0; b < E.r(); ++b)
                acc = acc + mu.comp[a] * nu.comp[b] * E.C(a, b, c);
        for (int a = 0; a < E.r(); ++a)
            for (int i = 0; i < E.n(); ++i) {
                acc = acc + E.rho(a, i) * mu.comp[a] * nu.comp[c].diff(i);
                acc = acc - E.rho(a, i) * nu.comp[a] * mu.comp[c].diff(i);
            }
        out.comp.push_back(acc);
    }
    return out;
}

Vec anchor_curvature(const LieAlgebroid& E, const Section& mu, const Section& nu,
                     const Vec& x) {
    if (!E.domain().contains(x)) throw DomainError("point outside chart domain");
    BaseVectorField lhs = anchor_apply(E, bracket(E, mu, nu));
    BaseVectorField rmu = anchor_apply(E, mu);
    BaseVectorField rnu = anchor_apply(E, nu);
    Vec out(E.n());
    for (int j = 0; j < E.n(); ++j) {
        double commutator = 0.0;
        for (int i = 0; i < E.n(); ++i) {
            commutator += rmu.comp[i].value(x) * rnu.comp[j].jet(x).g[i];
            commutator -= rnu.comp[i].value(x) * rmu.comp[j].jet(x).g[i];
        }
        out[j] = lhs.comp[j].value(x) - commutator;
    }
    return out;
}

Vec jacobiator(const LieAlgebroid& E, const Section& mu, const Section& nu,
               const Section& eta, const Vec& x) {
    if (!E.domain().contains(x)) throw DomainError("point outside chart domain");
    Section s1 = bracket(E, bracket(E, mu, nu), eta);
    Section s2 = bracket(E, bracket(E, nu, eta), mu);
    Section s3 = bracket(E, bracket(E, eta, mu), nu);
    Vec out(E.r());
    for (int c = 0; c < E.r(); ++c)
        out[c] = s1.comp[c].value(x) + s2.comp[c].value(x) + s3.comp[c].value(x);
    return out;
}

AxiomReport check_axioms(const LieAlgebroid& E, unsigned seed, int points,
                         int section_triples) {
    AxiomReport rep;
    std::mt19937 rng(seed);
    auto pts = E.sample_points(seed + 1, points);
    for (int t = 0; t < section_triples; ++t) {
        Section mu = E.random_section(rng);
        Section nu = E.random_section(rng);
        Section eta = E.random_section(rng);
        Section br = bracket(E, mu, nu);
        Section br_flip = bracket(E, nu, mu);

        // anchor defect fields: rho([mu,nu]) - [rho(mu), rho(nu)]
        BaseVectorField rbr = anchor_apply(E, br);
        BaseVectorField rmu = anchor_apply(E, mu);
        BaseVectorField rnu = anchor_apply(E, nu);
        std::vector<ScalarField> anchor_defect;
        for (int j = 0; j < E.n(); ++j) {
            ScalarField acc = rbr.comp[j];
            for (int i = 0; i < E.n(); ++i) {
                acc = acc - rmu.comp[i] * rnu.comp[j].diff(i);
                acc = acc + rnu.comp[i] * rmu.comp[j].diff(i);
            }
            anchor_defect.push_back(acc);
        }

        Section j1 = bracket(E, br, eta);
        Section j2 = bracket(E, bracket(E, nu, eta), mu);
        Section j3 = bracket(E, bracket(E, eta, mu), nu);

        for (const Vec& x : pts) {
            for (int c = 0; c < E.r(); ++c) {
                rep.antisymmetry = std::max(
                    rep.antisymmetry,
                    std::abs(br.comp[c].value(x) + br_flip.comp[c].value(x)));
                rep.jacobiator = std::max(
                    rep.jacobiator,
                    std::abs(j1.comp[c].value(x) + j2.comp[c].value(x) +
                             j3.comp[c].value(x)));
            }
            for (int j = 0; j < E.n(); ++j)
                rep.anchor_homomorphism = std::max(
                    rep.anchor_homomorphism, std::abs(anchor_defect[j].value(x)));
        }
    }
    rep.pass = rep.antisymmetry < 1e-12 && rep.anchor_homomorphism < 1e-9 &&
               rep.jacobiator < 1e-8;
    return rep;
}

AlgebroidPtr tangent_algebroid(int n, Box domain) {
    std::vector<ScalarField> anchor;
    for (int a = 0; a < n; ++a)
        for (int i = 0; i < n; ++i)
            anchor.push_back(ScalarField::constant(n, a == i ? 1.0 : 0.0));
    std::vector<ScalarField> structure(static_cast<size_t>(n) * n * n,
                                       ScalarField::constant(n, 0.0));
    return std::make_shared<LieAlgebroid>(n, n, std::move(anchor), std::move(structure),
                                          std::move(domain), "tangent");
}

AlgebroidPtr action_algebroid(int n, int r, const std::vector<double>& structure_constants,
                              std::vector<ScalarField> anchor, Box domain,
                              std::string name) {
    if (structure_constants.size() != static_cast<size_t>(r) * r * r)
        throw UsageError("structure constant table has wrong size");
    std::vector<ScalarField> structure;
    structure.reserve(structure_constants.size());
    for (double c : structure_constants) structure.push_back(ScalarField::constant(n, c));
    auto E = std::make_shared<LieAlgebroid>(n, r, std::move(anchor), std::move(structure),
                                            std::move(domain), std::move(name));
    AxiomReport rep = check_axioms(*E);
    if (!rep.pass) {
        std::ostringstream msg;
        msg << "action_algebroid: axioms fail (antisym " << rep.antisymmetry
            << ", anchor " << rep.anchor_homomorphism << ", jacobi " << rep.jacobiator
            << ")";
        throw UsageError(msg.str());
    }
    return E;
}

AlgebroidPtr lab(int n, int r, std::vector<ScalarField> structure, Box domain,
                 std::string name) {
    std::vector<ScalarField> anchor(static_cast<size_t>(n) * r,
                                    ScalarField::constant(n, 0.0));
    auto E = std::make_shared<LieAlgebroid>(n, r, std::move(anchor), std::move(structure),
                                            std::move(domain), std::move(name));
    AxiomReport rep = check_axioms(*E);
    if (!rep.pass) {
        std::ostringstream msg;
        msg << "lab: fibrewise Jacobi or antisymmetry fails (antisym "
            << rep.antisymmetry << ", jacobi " << rep.jacobiator << ")";
        throw UsageError(msg.str());
    }
    return E;
}

AlgebroidPtr direct_product(const AlgebroidPtr& E1, const AlgebroidPtr& E2) {
    int n = E1->n() + E2->n();
    int r = E1->r() + E2->r();
    auto lift1 = [&](const ScalarField& f) { return embed(f, n, 0); };
    auto lift2 = [&](const ScalarField& f) { return embed(f, n, E1->n()); };
    ScalarField zero = ScalarField::constant(n, 0.0);

    std::vector<ScalarField> anchor(static_cast<size_t>(r) * n, zero);
    for (int a = 0; a < E1->r(); ++a)
        for (int i = 0; i < E1->n(); ++i)
            anchor[static_cast<size_t>(a) * n + i] = lift1(E1->rho(a, i));
    for (int a = 0; a < E2->r(); ++a)
        for (int i = 0; i < E2->n(); ++i)
            anchor[static_cast<size_t>(E1->r() + a) * n + (E1->n() + i)] =
                lift2(E2->rho(a, i));

    std::vector<ScalarField> structure(static_cast<size_t>(r) * r * r, zero);
    for (int a = 0; a < E1->r(); ++a)
        for (int b = 0; b < E1->r(); ++b)
            for (int c = 0; c < E1->r(); ++c)
                structure[cidx(r, a, b, c)] = lift1(E1->C(a, b, c));
    for (int a = 0; a < E2->r(); ++a)
        for (int b = 0; b < E2->r(); ++b)
            for (int c = 0; c < E2->r(); ++c)
                structure[cidx(r, E1->r() + a, E1->r() + b, E1->r() + c)] =
                    lift2(E2->C(a, b, c));

    Box domain;
    domain.lo = Vec(n);
    domain.hi = Vec(n);
    domain.lo << E1->domain().lo, E2->domain().lo;
    domain.hi << E1->domain().hi, E2->domain().hi;
    return std::make_shared<LieAlgebroid>(n, r, std::move(anchor), std::move(structure),
                                          std::move(domain),
                                          E1->name() + "x" + E2->name());
}

AlgebroidPtr su2_example() {
    int n = 3, r = 3;
    std::vector<ScalarField> anchor;
    anchor.reserve(9);
    for (int a = 0; a < r; ++a)
        for (int i = 0; i < n; ++i) {
            // rho(e_a) = -eps_{a k i} x^k d_i
            ScalarField acc = ScalarField::constant(n, 0.0);
            for (int k = 0; k < n; ++k) {
                double e = eps3(a, k, i);
                if (e != 0.0) acc = acc - e * ScalarField::coordinate(n, k);
            }
            anchor.push_back(acc);
        }
    std::vector<double> structure(27, 0.0);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c) structure[cidx(r, a, b, c)] = eps3(a, b, c);
    Box domain;
    domain.lo = Vec::Constant(3, -1.5);
    domain.hi = Vec::Constant(3, 1.5);
    return action_algebroid(n, r, structure, std::move(anchor), std::move(domain), "su2");
}

AlgebroidPtr electroweak_example(double g_w, double g_prime, double n_gamma) {
    if (n_gamma == 0.0) throw UsageError("electroweak: n_gamma must be nonzero");
    int n = 4, r = 4;
    // Real 4x4 generators of the su(2) action on C^2 = R^4 and the u(1)
    // hypercharge scaling; anchors are the linear fields x -> (g/2) M x.
    auto M = [&](int l) {
        Mat m = Mat::Zero(4, 4);
        switch (l) {
            case 0:
                m << 0, 0, 0, 1, 0, 0, -1, 0, 0, 1, 0, 0, -1, 0, 0, 0;
                break;
            case 1:
                m << 0, 0, -1, 0, 0, 0, 0, -1, 1, 0, 0, 0, 0, 1, 0, 0;
                break;
            case 2:
                m << 0, 1, 0, 0, -1, 0, 0, 0, 0, 0, 0, -1, 0, 0, 1, 0;
                break;
            default:
                m = Mat::Identity(4, 4);
                break;
        }
        return m;
    };
    std::vector<ScalarField> anchor;
    anchor.reserve(16);
    for (int a = 0; a < r; ++a) {
        double coupling = (a < 3) ? g_w / 2.0 : g_prime / (2.0 * n_gamma);
        Mat m = M(a);
        for (int i = 0; i < n; ++i) {
            ScalarField acc = ScalarField::constant(n, 0.0);
            for (int k = 0; k < n; ++k)
                if (m(i, k) != 0.0)
                    acc = acc + coupling * m(i, k) * ScalarField::coordinate(n, k);
            anchor.push_back(acc);
        }
    }
    std::vector<double> structure(static_cast<size_t>(r) * r * r, 0.0);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c)
                structure[cidx(r, a, b, c)] = -g_w * eps3(a, b, c);
    Box domain;
    domain.lo = Vec::Constant(4, -1.2);
    domain.hi = Vec::Constant(4, 1.2);
    return action_algebroid(n, r, structure, std::move(anchor), std::move(domain),
                            "electroweak");
}

}  // namespace cymh
