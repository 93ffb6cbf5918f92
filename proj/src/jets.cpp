#include "cymh/jets.hpp"

#include <cmath>
#include <cstring>
#include <mutex>
#include <unordered_map>

namespace cymh {

namespace {

void check_same_dim(const Jet2& a, const Jet2& b) {
    if (a.dim() != b.dim()) throw UsageError("jet dimension mismatch");
}

// f(u) with f value/first/second derivative at u = a.v:
// grad = f' g, hess = f' h + f'' g g^T.
Jet2 lift_unary(const Jet2& a, double f, double fp, double fpp) {
    return {f, fp * a.g, fp * a.h + fpp * (a.g * a.g.transpose())};
}

}  // namespace

Jet2 operator+(const Jet2& a, const Jet2& b) {
    check_same_dim(a, b);
    return {a.v + b.v, a.g + b.g, a.h + b.h};
}

Jet2 operator-(const Jet2& a, const Jet2& b) {
    check_same_dim(a, b);
    return {a.v - b.v, a.g - b.g, a.h - b.h};
}

Jet2 operator-(const Jet2& a) { return {-a.v, -a.g, -a.h}; }

Jet2 operator*(const Jet2& a, const Jet2& b) {
    check_same_dim(a, b);
    Mat cross = a.g * b.g.transpose();
    return {a.v * b.v, a.v * b.g + b.v * a.g,
            a.v * b.h + b.v * a.h + cross + cross.transpose()};
}

Jet2 operator/(const Jet2& a, const Jet2& b) {
    check_same_dim(a, b);
    if (b.v == 0.0) throw DomainError("jet division by zero");
    Jet2 inv = lift_unary(b, 1.0 / b.v, -1.0 / (b.v * b.v), 2.0 / (b.v * b.v * b.v));
    return a * inv;
}

Jet2 operator+(const Jet2& a, double c) { return {a.v + c, a.g, a.h}; }
Jet2 operator+(double c, const Jet2& a) { return a + c; }
Jet2 operator-(const Jet2& a, double c) { return {a.v - c, a.g, a.h}; }
Jet2 operator-(double c, const Jet2& a) { return {c - a.v, -a.g, -a.h}; }
Jet2 operator*(const Jet2& a, double c) { return {a.v * c, a.g * c, a.h * c}; }
Jet2 operator*(double c, const Jet2& a) { return a * c; }
Jet2 operator/(const Jet2& a, double c) {
    if (c == 0.0) throw DomainError("jet division by zero");
    return a * (1.0 / c);
}

Jet2 jet_exp(const Jet2& a) {
    double e = std::exp(a.v);
    return lift_unary(a, e, e, e);
}

Jet2 jet_log(const Jet2& a) {
    if (a.v <= 0.0) throw DomainError("jet log of non-positive value");
    return lift_unary(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v));
}

Jet2 jet_sin(const Jet2& a) {
    return lift_unary(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v));
}

Jet2 jet_cos(const Jet2& a) {
    return lift_unary(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v));
}

Jet2 jet_sqrt(const Jet2& a) {
    if (a.v <= 0.0) throw DomainError("jet sqrt of non-positive value");
    double s = std::sqrt(a.v);
    return lift_unary(a, s, 0.5 / s, -0.25 / (s * a.v));
}

Jet2 jet_pow(const Jet2& a, int k) {
    if (k == 0) return Jet2::constant(a.dim(), 1.0);
    if (k < 0) return Jet2::constant(a.dim(), 1.0) / jet_pow(a, -k);
    double f = std::pow(a.v, k);
    double fp = k * std::pow(a.v, k - 1);
    double fpp = (k >= 2) ? double(k) * double(k - 1) * std::pow(a.v, k - 2) : 0.0;
    return lift_unary(a, f, fp, fpp);
}

Jet2 jet_partial(const Jet2& a, int i) {
    if (i < 0 || i >= a.dim()) throw UsageError("jet_partial: index out of range");
    return {a.g[i], a.h.row(i).transpose(), Mat::Zero(a.dim(), a.dim())};
}

Jet2 jet_compose(const Jet2& f, const std::vector<Jet2>& phi) {
    if (static_cast<size_t>(f.dim()) != phi.size())
        throw UsageError("jet_compose: arity mismatch");
    if (phi.empty()) throw UsageError("jet_compose: empty argument list");
    int m = phi[0].dim();
    Jet2 out = Jet2::constant(m, f.v);
    Mat jac(static_cast<int>(phi.size()), m);  // rows: inner components
    for (size_t i = 0; i < phi.size(); ++i) {
        if (phi[i].dim() != m) throw UsageError("jet_compose: mixed jet dimensions");
        jac.row(static_cast<int>(i)) = phi[i].g.transpose();
        out.g += f.g[static_cast<int>(i)] * phi[i].g;
        out.h += f.g[static_cast<int>(i)] * phi[i].h;
    }
    out.h += jac.transpose() * f.h * jac;
    return out;
}

std::vector<Jet2> jet_linear_solve(std::vector<std::vector<Jet2>> A, std::vector<Jet2> b) {
    size_t n = b.size();
    if (A.size() != n) throw UsageError("jet_linear_solve: shape mismatch");
    for (auto& row : A)
        if (row.size() != n) throw UsageError("jet_linear_solve: non-square matrix");

    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        for (size_t r = col + 1; r < n; ++r)
            if (std::abs(A[r][col].v) > std::abs(A[piv][col].v)) piv = r;
        if (std::abs(A[piv][col].v) < 1e-12)
            throw SingularSystemError("jet_linear_solve: pivot below 1e-12");
        std::swap(A[piv], A[col]);
        std::swap(b[piv], b[col]);
        for (size_t r = col + 1; r < n; ++r) {
            Jet2 factor = A[r][col] / A[col][col];
            for (size_t c = col; c < n; ++c) A[r][c] = A[r][c] - factor * A[col][c];
            b[r] = b[r] - factor * b[col];
        }
    }
    std::vector<Jet2> x(n);
    for (size_t ri = n; ri-- > 0;) {
        Jet2 acc = b[ri];
        for (size_t c = ri + 1; c < n; ++c) acc = acc - A[ri][c] * x[c];
        x[ri] = acc / A[ri][ri];
    }
    return x;
}

// ---------------------------------------------------------------------------
// Expression trees.

// Memo entries co-own their node: the table outlives single root evaluations
// (it is shared across a whole point sweep), so keying by a raw pointer alone
// would let a freed node's address be recycled by a new expression and serve
// it a stale jet.
using EvalMemo =
    std::unordered_map<const Expr*, std::pair<std::shared_ptr<const Expr>, Jet2>>;

// Per-root-evaluation context: the coordinate jets plus a memo table that
// collapses the shared-subexpression DAG to one evaluation per node.
struct EvalCtx {
    const std::vector<Jet2>* coords;
    EvalMemo* memo;
};

class Expr : public std::enable_shared_from_this<Expr> {
public:
    explicit Expr(int dim) : dim_(dim) {}
    virtual ~Expr() = default;
    int dim() const { return dim_; }
    Jet2 eval(EvalCtx& ctx) const {
        auto it = ctx.memo->find(this);
        if (it != ctx.memo->end()) return it->second.second;
        Jet2 v = eval_impl(ctx);
        ctx.memo->emplace(this, std::make_pair(shared_from_this(), v));
        return v;
    }
    Jet2 eval_root(const std::vector<Jet2>& coords) const {
        EvalMemo memo;
        EvalCtx ctx{&coords, &memo};
        return eval(ctx);
    }
    virtual Jet2 eval_impl(EvalCtx& ctx) const = 0;
    // Default: derive from own jets, valid one order down.
    virtual ScalarField diff(std::shared_ptr<const Expr> self, int i) const;

    // Cache so shared subexpressions share their derivative trees too;
    // keeps the expression DAG compact under repeated differentiation.
    mutable std::mutex diff_mu;
    mutable std::unordered_map<int, ScalarField> diff_cache;

private:
    int dim_;
};

namespace {

ScalarField wrap(std::shared_ptr<const Expr> e) { return ScalarField(std::move(e)); }

class ConstExpr final : public Expr {
public:
    ConstExpr(int dim, double c) : Expr(dim), c_(c) {}
    Jet2 eval_impl(EvalCtx& ctx) const override {
        return Jet2::constant((*ctx.coords)[0].dim(), c_);
    }
    ScalarField diff(std::shared_ptr<const Expr>, int) const override {
        return ScalarField::constant(dim(), 0.0);
    }
    double value() const { return c_; }

private:
    double c_;
};

class CoordExpr final : public Expr {
public:
    CoordExpr(int dim, int i) : Expr(dim), i_(i) {
        if (i < 0 || i >= dim) throw UsageError("coordinate index out of range");
    }
    Jet2 eval_impl(EvalCtx& ctx) const override { return (*ctx.coords)[i_]; }
    ScalarField diff(std::shared_ptr<const Expr>, int i) const override {
        return ScalarField::constant(dim(), i == i_ ? 1.0 : 0.0);
    }

private:
    int i_;
};

enum class BinOp { Add, Sub, Mul, Div };

class BinExpr final : public Expr {
public:
    BinExpr(ScalarField a, ScalarField b, BinOp op)
        : Expr(a.dim()), a_(std::move(a)), b_(std::move(b)), op_(op) {
        if (a_.dim() != b_.dim()) throw UsageError("field chart dimension mismatch");
    }
    Jet2 eval_impl(EvalCtx& ctx) const override {
        Jet2 a = a_.expr()->eval(ctx);
        Jet2 b = b_.expr()->eval(ctx);
        switch (op_) {
            case BinOp::Add: return a + b;
            case BinOp::Sub: return a - b;
            case BinOp::Mul: return a * b;
            case BinOp::Div: return a / b;
        }
        throw UsageError("unreachable");
    }
    ScalarField diff(std::shared_ptr<const Expr>, int i) const override {
        switch (op_) {
            case BinOp::Add: return a_.diff(i) + b_.diff(i);
            case BinOp::Sub: return a_.diff(i) - b_.diff(i);
            case BinOp::Mul: return a_.diff(i) * b_ + a_ * b_.diff(i);
            case BinOp::Div:
                return a_.diff(i) / b_ - (a_ * b_.diff(i)) / (b_ * b_);
        }
        throw UsageError("unreachable");
    }

private:
    ScalarField a_, b_;
    BinOp op_;
};

enum class UnOp { Neg, Exp, Log, Sin, Cos, Sqrt };

class UnExpr final : public Expr {
public:
    UnExpr(ScalarField a, UnOp op) : Expr(a.dim()), a_(std::move(a)), op_(op) {}
    Jet2 eval_impl(EvalCtx& ctx) const override {
        Jet2 a = a_.expr()->eval(ctx);
        switch (op_) {
            case UnOp::Neg: return -a;
            case UnOp::Exp: return jet_exp(a);
            case UnOp::Log: return jet_log(a);
            case UnOp::Sin: return jet_sin(a);
            case UnOp::Cos: return jet_cos(a);
            case UnOp::Sqrt: return jet_sqrt(a);
        }
        throw UsageError("unreachable");
    }
    ScalarField diff(std::shared_ptr<const Expr> self, int i) const override {
        ScalarField da = a_.diff(i);
        switch (op_) {
            case UnOp::Neg: return -da;
            case UnOp::Exp: return wrap(self) * da;
            case UnOp::Log: return da / a_;
            case UnOp::Sin: return f_cos(a_) * da;
            case UnOp::Cos: return -f_sin(a_) * da;
            case UnOp::Sqrt: return da / (2.0 * wrap(self));
        }
        throw UsageError("unreachable");
    }

private:
    ScalarField a_;
    UnOp op_;
};

class PowExpr final : public Expr {
public:
    PowExpr(ScalarField a, int k) : Expr(a.dim()), a_(std::move(a)), k_(k) {}
    Jet2 eval_impl(EvalCtx& ctx) const override {
        return jet_pow(a_.expr()->eval(ctx), k_);
    }
    ScalarField diff(std::shared_ptr<const Expr>, int i) const override {
        if (k_ == 0) return ScalarField::constant(dim(), 0.0);
        return double(k_) * f_pow(a_, k_ - 1) * a_.diff(i);
    }

private:
    ScalarField a_;
    int k_;
};

class FnExpr final : public Expr {
public:
    FnExpr(int dim, std::function<Jet2(const std::vector<Jet2>&)> fn)
        : Expr(dim), fn_(std::move(fn)) {}
    Jet2 eval_impl(EvalCtx& ctx) const override { return fn_(*ctx.coords); }

private:
    std::function<Jet2(const std::vector<Jet2>&)> fn_;
};

// Partial derivative of an opaque field, read off the parent's jets.
class JetDerivExpr final : public Expr {
public:
    JetDerivExpr(ScalarField parent, int i) : Expr(parent.dim()), parent_(std::move(parent)), i_(i) {}
    Jet2 eval_impl(EvalCtx& ctx) const override {
        return jet_partial(parent_.expr()->eval(ctx), i_);
    }

private:
    ScalarField parent_;
    int i_;
};

class EmbedExpr final : public Expr {
public:
    EmbedExpr(ScalarField inner, int total_dim, int offset)
        : Expr(total_dim), inner_(std::move(inner)), offset_(offset) {
        if (offset < 0 || offset + inner_.dim() > total_dim)
            throw UsageError("embed: slice out of range");
    }
    Jet2 eval_impl(EvalCtx& ctx) const override {
        std::vector<Jet2> slice(ctx.coords->begin() + offset_,
                                ctx.coords->begin() + offset_ + inner_.dim());
        // Routed through at(): the sliced jets live in the product chart, so
        // this is a composition from the inner field's point of view.
        return inner_.at(slice);
    }
    ScalarField diff(std::shared_ptr<const Expr>, int i) const override {
        if (i < offset_ || i >= offset_ + inner_.dim())
            return ScalarField::constant(dim(), 0.0);
        return embed(inner_.diff(i - offset_), dim(), offset_);
    }

private:
    ScalarField inner_;
    int offset_;
};

struct GroupState {
    int dim = 0;
    int count = 0;
    std::function<std::vector<Jet2>(const Vec&)> fn;
    mutable std::mutex mu;
    mutable std::unordered_map<std::string, std::shared_ptr<const std::vector<Jet2>>> cache;

    std::shared_ptr<const std::vector<Jet2>> tables(const Vec& x) const {
        std::string key(reinterpret_cast<const char*>(x.data()), sizeof(double) * x.size());
        {
            std::lock_guard<std::mutex> lock(mu);
            auto it = cache.find(key);
            if (it != cache.end()) return it->second;
        }
        auto val = std::make_shared<const std::vector<Jet2>>(fn(x));
        if (static_cast<int>(val->size()) != count)
            throw UsageError("field group evaluator returned wrong count");
        std::lock_guard<std::mutex> lock(mu);
        if (cache.size() > 4096) cache.clear();
        cache.emplace(key, val);
        return val;
    }
};

class GroupExpr final : public Expr {
public:
    GroupExpr(std::shared_ptr<GroupState> st, int index)
        : Expr(st->dim), st_(std::move(st)), index_(index) {}
    Jet2 eval_impl(EvalCtx& ctx) const override {
        const auto& coords = *ctx.coords;
        Vec x(coords.size());
        for (size_t i = 0; i < coords.size(); ++i) x[static_cast<int>(i)] = coords[i].v;
        return (*st_->tables(x))[index_];
    }

private:
    std::shared_ptr<GroupState> st_;
    int index_;
};

bool is_identity_seed(const std::vector<Jet2>& args) {
    int m = args[0].dim();
    if (static_cast<int>(args.size()) != m) return false;
    for (int i = 0; i < m; ++i) {
        const Jet2& a = args[static_cast<size_t>(i)];
        for (int j = 0; j < m; ++j)
            if (a.g[j] != (i == j ? 1.0 : 0.0)) return false;
        if (a.h.cwiseAbs().maxCoeff() != 0.0) return false;
    }
    return true;
}

}  // namespace

ScalarField Expr::diff(std::shared_ptr<const Expr> self, int i) const {
    return wrap(std::make_shared<JetDerivExpr>(wrap(std::move(self)), i));
}

ScalarField::ScalarField(std::shared_ptr<const Expr> e) : expr_(std::move(e)) {}

int ScalarField::dim() const {
    if (!expr_) throw UsageError("empty field");
    return expr_->dim();
}

Jet2 ScalarField::jet(const Vec& x) const {
    if (!expr_) throw UsageError("empty field");
    if (x.size() != expr_->dim()) throw UsageError("evaluation point has wrong dimension");
    auto seeds = Jet2::seed_all(x);
    // Memos shared across evaluations at the same chart point, so that
    // sweeping a large coefficient table point by point evaluates each shared
    // subexpression once per point. Two keyed slots cover the common nesting
    // pattern (a composition sweeps one chart point while evaluating its inner
    // map at another); a slot is only re-keyed when no evaluation further up
    // the call stack is using it, otherwise that evaluation would keep filling
    // a table now keyed to a different point. Evaluations that find both slots
    // busy fall back to a private memo.
    struct MemoSlot {
        std::string key;
        EvalMemo memo;
        int in_use = 0;
        unsigned long last = 0;
    };
    thread_local MemoSlot slots[2];
    thread_local unsigned long stamp = 0;
    std::string key(reinterpret_cast<const char*>(x.data()), sizeof(double) * x.size());
    key.push_back(static_cast<char>(x.size() & 0xff));

    MemoSlot* slot = nullptr;
    for (auto& s : slots)
        if (s.key == key) slot = &s;
    if (!slot) {
        for (auto& s : slots)
            if (s.in_use == 0 && (!slot || s.last < slot->last)) slot = &s;
        if (slot) {
            slot->key = key;
            slot->memo.clear();
        }
    }
    if (!slot) {
        EvalMemo local;
        EvalCtx ctx{&seeds, &local};
        return expr_->eval(ctx);
    }
    slot->last = ++stamp;
    struct UseGuard {
        MemoSlot* s;
        explicit UseGuard(MemoSlot* slot_ptr) : s(slot_ptr) { ++s->in_use; }
        ~UseGuard() { --s->in_use; }
    } guard(slot);
    EvalCtx ctx{&seeds, &slot->memo};
    return expr_->eval(ctx);
}

Jet2 ScalarField::at(const std::vector<Jet2>& args) const {
    if (!expr_) throw UsageError("empty field");
    if (static_cast<int>(args.size()) != expr_->dim())
        throw UsageError("evaluation arity mismatch");
    if (args.empty()) throw UsageError("empty argument list");
    // Identity-seeded chart points evaluate directly; anything else is a
    // composition and routes through the chart jet plus the chain rule so
    // that opaque evaluators stay correct under composition.
    if (is_identity_seed(args)) return expr_->eval_root(args);
    Vec x(args.size());
    for (size_t i = 0; i < args.size(); ++i) x[static_cast<int>(i)] = args[i].v;
    return jet_compose(jet(x), args);
}

ScalarField ScalarField::diff(int i) const {
    if (!expr_) throw UsageError("empty field");
    if (i < 0 || i >= expr_->dim()) throw UsageError("diff index out of range");
    std::lock_guard<std::mutex> lock(expr_->diff_mu);
    auto it = expr_->diff_cache.find(i);
    if (it != expr_->diff_cache.end()) return it->second;
    ScalarField d = expr_->diff(expr_, i);
    expr_->diff_cache.emplace(i, d);
    return d;
}

ScalarField ScalarField::constant(int dim, double c) {
    return wrap(std::make_shared<ConstExpr>(dim, c));
}

ScalarField ScalarField::coordinate(int dim, int i) {
    return wrap(std::make_shared<CoordExpr>(dim, i));
}

ScalarField ScalarField::from_fn(int dim, std::function<Jet2(const std::vector<Jet2>&)> fn) {
    return wrap(std::make_shared<FnExpr>(dim, std::move(fn)));
}

namespace {

// Peephole constant folding; keeps tensor calculus trees (which are full of
// structural zeros) from ballooning.
bool const_value(const ScalarField& f, double* out) {
    if (auto c = dynamic_cast<const ConstExpr*>(f.expr().get())) {
        *out = c->value();
        return true;
    }
    return false;
}

}  // namespace

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
    double ca, cb;
    bool ka = const_value(a, &ca), kb = const_value(b, &cb);
    if (ka && kb) return ScalarField::constant(a.dim(), ca + cb);
    if (ka && ca == 0.0) return b;
    if (kb && cb == 0.0) return a;
    return wrap(std::make_shared<BinExpr>(a, b, BinOp::Add));
}
ScalarField operator-(const ScalarField& a, const ScalarField& b) {
    double ca, cb;
    bool ka = const_value(a, &ca), kb = const_value(b, &cb);
    if (ka && kb) return ScalarField::constant(a.dim(), ca - cb);
    if (kb && cb == 0.0) return a;
    if (ka && ca == 0.0) return -b;
    return wrap(std::make_shared<BinExpr>(a, b, BinOp::Sub));
}
ScalarField operator-(const ScalarField& a) {
    double ca;
    if (const_value(a, &ca)) return ScalarField::constant(a.dim(), -ca);
    return wrap(std::make_shared<UnExpr>(a, UnOp::Neg));
}
ScalarField operator*(const ScalarField& a, const ScalarField& b) {
    double ca, cb;
    bool ka = const_value(a, &ca), kb = const_value(b, &cb);
    if (ka && kb) return ScalarField::constant(a.dim(), ca * cb);
    if ((ka && ca == 0.0) || (kb && cb == 0.0))
        return ScalarField::constant(a.dim(), 0.0);
    if (ka && ca == 1.0) return b;
    if (kb && cb == 1.0) return a;
    return wrap(std::make_shared<BinExpr>(a, b, BinOp::Mul));
}
ScalarField operator/(const ScalarField& a, const ScalarField& b) {
    double ca, cb;
    bool ka = const_value(a, &ca), kb = const_value(b, &cb);
    if (kb && cb == 1.0) return a;
    if (kb && cb != 0.0 && ka) return ScalarField::constant(a.dim(), ca / cb);
    if (ka && ca == 0.0) return a;
    return wrap(std::make_shared<BinExpr>(a, b, BinOp::Div));
}
ScalarField operator+(const ScalarField& a, double c) {
    return a + ScalarField::constant(a.dim(), c);
}
ScalarField operator+(double c, const ScalarField& a) { return a + c; }
ScalarField operator-(const ScalarField& a, double c) { return a + (-c); }
ScalarField operator-(double c, const ScalarField& a) {
    return ScalarField::constant(a.dim(), c) - a;
}
ScalarField operator*(const ScalarField& a, double c) {
    return a * ScalarField::constant(a.dim(), c);
}
ScalarField operator*(double c, const ScalarField& a) { return a * c; }
ScalarField operator/(double c, const ScalarField& a) {
    return ScalarField::constant(a.dim(), c) / a;
}
ScalarField operator/(const ScalarField& a, double c) {
    return a * (1.0 / c);
}

ScalarField f_exp(const ScalarField& a) { return wrap(std::make_shared<UnExpr>(a, UnOp::Exp)); }
ScalarField f_log(const ScalarField& a) { return wrap(std::make_shared<UnExpr>(a, UnOp::Log)); }
ScalarField f_sin(const ScalarField& a) { return wrap(std::make_shared<UnExpr>(a, UnOp::Sin)); }
ScalarField f_cos(const ScalarField& a) { return wrap(std::make_shared<UnExpr>(a, UnOp::Cos)); }
ScalarField f_sqrt(const ScalarField& a) { return wrap(std::make_shared<UnExpr>(a, UnOp::Sqrt)); }
ScalarField f_pow(const ScalarField& a, int k) { return wrap(std::make_shared<PowExpr>(a, k)); }

ScalarField embed(const ScalarField& f, int total_dim, int offset) {
    return wrap(std::make_shared<EmbedExpr>(f, total_dim, offset));
}

std::vector<ScalarField> make_field_group(
    int dim, int count, std::function<std::vector<Jet2>(const Vec&)> fn) {
    auto st = std::make_shared<GroupState>();
    st->dim = dim;
    st->count = count;
    st->fn = std::move(fn);
    std::vector<ScalarField> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) out.push_back(wrap(std::make_shared<GroupExpr>(st, i)));
    return out;
}

std::vector<ScalarField> matrix_inverse_fields(const std::vector<ScalarField>& entries,
                                               int m) {
    if (entries.size() != static_cast<size_t>(m) * m)
        throw UsageError("matrix_inverse_fields: wrong entry count");
    int dim = entries[0].dim();
    // one group evaluation per point: solve A X = I column by column
    return make_field_group(dim, m * m, [entries, m](const Vec& x) {
        auto seeds = Jet2::seed_all(x);
        std::vector<std::vector<Jet2>> A(m, std::vector<Jet2>(m));
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                A[i][j] = entries[static_cast<size_t>(i) * m + j].at(seeds);
        std::vector<Jet2> out(static_cast<size_t>(m) * m);
        for (int col = 0; col < m; ++col) {
            std::vector<Jet2> e(m);
            for (int i = 0; i < m; ++i)
                e[i] = Jet2::constant(static_cast<int>(x.size()), i == col ? 1.0 : 0.0);
            auto sol = jet_linear_solve(A, e);
            for (int i = 0; i < m; ++i) out[static_cast<size_t>(i) * m + col] = sol[i];
        }
        return out;
    });
}

double fd_oracle(const ScalarField& f, const Vec& x, const Vec& direction, double h) {
    return (f.value(x + h * direction) - f.value(x - h * direction)) / (2.0 * h);
}

double fd_oracle2(const ScalarField& f, const Vec& x, const Vec& direction, double h) {
    return (f.value(x + h * direction) - 2.0 * f.value(x) + f.value(x - h * direction)) / (h * h);
}

}  // namespace cymh
