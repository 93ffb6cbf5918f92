#pragma once

// Lie algebroids in a single chart: anchor and structure-function tables over
// a box domain, plus the bracket calculus and the standard constructions.

#include "cymh/jets.hpp"

#include <memory>
#include <random>
#include <string>
#include <vector>

namespace cymh {

/// Axis-aligned sampling box. Draws are taken from the box shrunk by 5% per
/// side so finite-difference probes stay inside the domain.
struct Box {
    Vec lo, hi;

    int dim() const { return static_cast<int>(lo.size()); }
    bool contains(const Vec& x) const;
    Vec sample(std::mt19937& rng) const;
};

/// Section of the bundle E in the chart frame: r component fields on the base.
struct Section {
    std::vector<ScalarField> comp;

    int rank() const { return static_cast<int>(comp.size()); }
};

/// Vector field on the base: n component fields.
struct BaseVectorField {
    std::vector<ScalarField> comp;

    int dim() const { return static_cast<int>(comp.size()); }
};

struct AxiomReport {
    double antisymmetry = 0.0;
    double anchor_homomorphism = 0.0;
    double jacobiator = 0.0;
    bool pass = false;
};

/// Chart data of a Lie algebroid: base dimension n, rank r, anchor components
/// rho^i_a(x) and structure functions C^c_ab(x) of the frame bracket.
class LieAlgebroid {
public:
    LieAlgebroid(int n, int r, std::vector<ScalarField> anchor,
                 std::vector<ScalarField> structure, Box domain,
                 std::string name = "algebroid");

    int n() const { return n_; }
    int r() const { return r_; }
    const Box& domain() const { return domain_; }
    const std::string& name() const { return name_; }

    /// rho^i_a: chart components of the anchor of frame section e_a.
    const ScalarField& rho(int a, int i) const { return anchor_[a * n_ + i]; }
    /// C^c_ab: coefficient of e_c in [e_a, e_b].
    const ScalarField& C(int a, int b, int c) const {
        return structure_[(a * r_ + b) * r_ + c];
    }

    Section zero_section() const;
    Section frame_section(int a) const;
    /// Random polynomial section (degree <= 2), reproducible from the seed.
    Section random_section(std::mt19937& rng) const;
    BaseVectorField random_vector_field(std::mt19937& rng) const;

    std::vector<Vec> sample_points(unsigned seed, int count) const;

private:
    int n_, r_;
    std::vector<ScalarField> anchor_;     // [a * n + i]
    std::vector<ScalarField> structure_;  // [(a * r + b) * r + c]
    Box domain_;
    std::string name_;
};

using AlgebroidPtr = std::shared_ptr<const LieAlgebroid>;

/// rho(mu) as a base vector field.
BaseVectorField anchor_apply(const LieAlgebroid& E, const Section& mu);

/// [mu, nu]^c = mu^a nu^b C^c_ab + rho^i_a mu^a d_i nu^c - rho^i_b nu^b d_i mu^c.
Section bracket(const LieAlgebroid& E, const Section& mu, const Section& nu);

/// rho([mu,nu]) - [rho(mu), rho(nu)] at a point; zero iff the anchor is a
/// bracket homomorphism there.
Vec anchor_curvature(const LieAlgebroid& E, const Section& mu, const Section& nu,
                     const Vec& x);

/// Cyclic sum [[mu,nu],eta] + [[nu,eta],mu] + [[eta,mu],nu] at a point.
Vec jacobiator(const LieAlgebroid& E, const Section& mu, const Section& nu,
               const Section& eta, const Vec& x);

/// Evaluates the three axiom residuals over random sections and points.
AxiomReport check_axioms(const LieAlgebroid& E, unsigned seed = 1, int points = 20,
                         int section_triples = 5);

/// Tangent algebroid of R^n: identity anchor, vanishing structure functions.
AlgebroidPtr tangent_algebroid(int n, Box domain);

/// Action algebroid from constant structure constants C[a][b][c] = C^c_ab and
/// fundamental vector fields; validates the axioms and rejects bad input.
AlgebroidPtr action_algebroid(int n, int r, const std::vector<double>& structure_constants,
                              std::vector<ScalarField> anchor, Box domain,
                              std::string name = "action");

/// Lie algebra bundle: zero anchor, x-dependent structure functions that must
/// satisfy the fibrewise Jacobi identity.
AlgebroidPtr lab(int n, int r, std::vector<ScalarField> structure, Box domain,
                 std::string name = "lab");

/// Direct product with block-diagonal anchor and structure functions.
AlgebroidPtr direct_product(const AlgebroidPtr& E1, const AlgebroidPtr& E2);

/// su(2) acting on R^3 by rotations.
AlgebroidPtr su2_example();

/// su(2) x u(1) acting on R^4 = C^2; g_w and g_prime are the coupling
/// constants, n_gamma the hypercharge normalisation of the u(1) generator.
AlgebroidPtr electroweak_example(double g_w = 0.65, double g_prime = 0.35,
                                 double n_gamma = 1.0);

/// Helper: flat structure-constant table index (a * r + b) * r + c for C^c_ab.
inline size_t cidx(int r, int a, int b, int c) {
    return static_cast<size_t>((a * r + b) * r + c);
}

}  // namespace cymh
