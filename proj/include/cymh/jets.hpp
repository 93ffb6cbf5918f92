#pragma once

// Order-2 jet arithmetic (value, gradient, Hessian) and chart scalar fields.
// Every other module evaluates its tensor data through this substrate.

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace cymh {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct SingularSystemError : std::runtime_error {
    explicit SingularSystemError(const std::string& what) : std::runtime_error(what) {}
};

struct UsageError : std::invalid_argument {
    explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

struct DomainError : std::domain_error {
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Value, gradient and Hessian of a chart function at a point. Arithmetic
/// propagates derivatives exactly (Leibniz and chain rule at order 2).
struct Jet2 {
    double v = 0.0;
    Vec g;
    Mat h;

    Jet2() = default;
    Jet2(double value, Vec grad, Mat hess)
        : v(value), g(std::move(grad)), h(std::move(hess)) {}

    int dim() const { return static_cast<int>(g.size()); }

    static Jet2 constant(int dim, double c) {
        return {c, Vec::Zero(dim), Mat::Zero(dim, dim)};
    }
    /// Jet of the i-th coordinate function seeded at x.
    static Jet2 seed(const Vec& x, int i) {
        Jet2 j = constant(static_cast<int>(x.size()), x[i]);
        j.g[i] = 1.0;
        return j;
    }
    static std::vector<Jet2> seed_all(const Vec& x) {
        std::vector<Jet2> out;
        out.reserve(x.size());
        for (int i = 0; i < x.size(); ++i) out.push_back(seed(x, i));
        return out;
    }
};

Jet2 operator+(const Jet2& a, const Jet2& b);
Jet2 operator-(const Jet2& a, const Jet2& b);
Jet2 operator-(const Jet2& a);
Jet2 operator*(const Jet2& a, const Jet2& b);
Jet2 operator/(const Jet2& a, const Jet2& b);
Jet2 operator+(const Jet2& a, double c);
Jet2 operator+(double c, const Jet2& a);
Jet2 operator-(const Jet2& a, double c);
Jet2 operator-(double c, const Jet2& a);
Jet2 operator*(const Jet2& a, double c);
Jet2 operator*(double c, const Jet2& a);
Jet2 operator/(const Jet2& a, double c);

Jet2 jet_exp(const Jet2& a);
Jet2 jet_log(const Jet2& a);
Jet2 jet_sin(const Jet2& a);
Jet2 jet_cos(const Jet2& a);
Jet2 jet_sqrt(const Jet2& a);
Jet2 jet_pow(const Jet2& a, int k);

/// Jet whose value is the i-th partial of `a` (one order of derivative
/// information is consumed: the Hessian of the result is not available and
/// is filled with zeros).
Jet2 jet_partial(const Jet2& a, int i);

/// Second-order chain rule: jet of f∘phi from the jet of f at phi's value
/// (taken w.r.t. f's chart) and the jets of phi's components.
Jet2 jet_compose(const Jet2& f, const std::vector<Jet2>& phi);

/// Solves A·v = b over jet arithmetic; Gaussian elimination with partial
/// pivoting on the value parts. Throws SingularSystemError when the pivot
/// magnitude drops below 1e-12.
std::vector<Jet2> jet_linear_solve(std::vector<std::vector<Jet2>> A, std::vector<Jet2> b);

class Expr;

/// A real-valued function on a chart, evaluable to second order. Immutable
/// and pure: evaluation at the same point is bit-identical, safe to share
/// across threads.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(std::shared_ptr<const Expr> e);

    bool valid() const { return static_cast<bool>(expr_); }
    int dim() const;

    /// Jet at a chart point (coordinates seeded with identity derivatives).
    Jet2 jet(const Vec& x) const;
    /// Evaluation at jet-valued arguments (composition with another chart).
    Jet2 at(const std::vector<Jet2>& args) const;
    double value(const Vec& x) const { return jet(x).v; }

    /// Partial derivative as a new field. Exact for fields built from the
    /// expression combinators below; fields wrapping opaque evaluators fall
    /// back to extracting the derivative from their own jets, which loses
    /// one derivative order.
    ScalarField diff(int i) const;

    static ScalarField constant(int dim, double c);
    static ScalarField coordinate(int dim, int i);
    /// Wraps an arbitrary jet-level evaluator.
    static ScalarField from_fn(int dim, std::function<Jet2(const std::vector<Jet2>&)> fn);

    const std::shared_ptr<const Expr>& expr() const { return expr_; }

private:
    std::shared_ptr<const Expr> expr_;
};

ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a);
ScalarField operator*(const ScalarField& a, const ScalarField& b);
ScalarField operator/(const ScalarField& a, const ScalarField& b);
ScalarField operator+(const ScalarField& a, double c);
ScalarField operator+(double c, const ScalarField& a);
ScalarField operator-(const ScalarField& a, double c);
ScalarField operator-(double c, const ScalarField& a);
ScalarField operator*(const ScalarField& a, double c);
ScalarField operator*(double c, const ScalarField& a);
ScalarField operator/(double c, const ScalarField& a);
ScalarField operator/(const ScalarField& a, double c);

ScalarField f_exp(const ScalarField& a);
ScalarField f_log(const ScalarField& a);
ScalarField f_sin(const ScalarField& a);
ScalarField f_cos(const ScalarField& a);
ScalarField f_sqrt(const ScalarField& a);
ScalarField f_pow(const ScalarField& a, int k);

/// Re-indexes a field on a lower-dimensional chart into a product chart:
/// the field reads coordinates [offset, offset+f.dim()).
ScalarField embed(const ScalarField& f, int total_dim, int offset);

/// A family of fields computed together from one per-point table evaluator
/// (with memoization keyed on the evaluation point). Used for coefficient
/// tables obtained from linear solves or ODE integration.
std::vector<ScalarField> make_field_group(
    int dim, int count, std::function<std::vector<Jet2>(const Vec&)> fn);

/// Entrywise inverse of an m-by-m matrix of fields (row-major), computed by
/// jet Gaussian elimination; exact to second order. Throws
/// SingularSystemError at evaluation points where the matrix degenerates.
std::vector<ScalarField> matrix_inverse_fields(const std::vector<ScalarField>& entries,
                                               int m);

/// Central-difference directional derivative (f(x+hv) - f(x-hv)) / (2h);
/// the finite-difference oracle that keeps the jet engine honest.
double fd_oracle(const ScalarField& f, const Vec& x, const Vec& direction, double h);

/// Second-order central difference (f(x+hv) - 2 f(x) + f(x-hv)) / h^2,
/// an independent check of Hessian-vector products.
double fd_oracle2(const ScalarField& f, const Vec& x, const Vec& direction, double h);

}  // namespace cymh
