#pragma once

#include <cmath>
#include <utility>

#include "geotherm/error.hpp"
#include "geotherm/poly.hpp"

namespace geotherm {

// Quotient of two generalized polynomials. Quotients are never reduced — there
// is no GCD theory for real-exponent sums — so all zero/equality questions are
// answered numerically. The only structural shortcut: when two operands share
// a structurally identical denominator, a/b + c/b = (a+c)/b instead of the
// cross-multiplied form. Without it, denominator degree doubles at every one
// of the thousands of additions in the curvature pipeline.
class RationalExpr {
public:
    RationalExpr() : num_(GenPoly::zero()), den_(GenPoly::constant(1.0)) {}

    RationalExpr(GenPoly num, GenPoly den) : num_(std::move(num)), den_(std::move(den)) {
        if (den_.is_zero()) throw DivisionByZeroExpression();
    }

    // Embed a polynomial as p/1.
    RationalExpr(GenPoly p) : num_(std::move(p)), den_(GenPoly::constant(1.0)) {}  // NOLINT

    static RationalExpr zero() { return RationalExpr(); }
    static RationalExpr constant(double c) { return RationalExpr(GenPoly::constant(c)); }

    const GenPoly& num() const { return num_; }
    const GenPoly& den() const { return den_; }

    bool is_structural_zero() const { return num_.is_zero(); }
    bool den_is_one() const { return den_ == GenPoly::constant(1.0); }

    friend RationalExpr operator+(const RationalExpr& a, const RationalExpr& b) {
        if (a.den_ == b.den_) return RationalExpr(a.num_ + b.num_, a.den_);
        return RationalExpr(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
    }

    friend RationalExpr operator-(const RationalExpr& a, const RationalExpr& b) {
        if (a.den_ == b.den_) return RationalExpr(a.num_ - b.num_, a.den_);
        return RationalExpr(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
    }

    RationalExpr operator-() const { return RationalExpr(-num_, den_); }

    friend RationalExpr operator*(const RationalExpr& a, const RationalExpr& b) {
        if (a.num_.is_zero() || b.num_.is_zero()) return RationalExpr::zero();
        GenPoly den;
        if (a.den_is_one())
            den = b.den_;
        else if (b.den_is_one())
            den = a.den_;
        else
            den = a.den_ * b.den_;
        return RationalExpr(a.num_ * b.num_, std::move(den));
    }

    friend RationalExpr operator/(const RationalExpr& a, const RationalExpr& b) {
        if (b.num_.is_zero()) throw DivisionByZeroExpression();
        if (a.num_.is_zero()) return RationalExpr::zero();
        return RationalExpr(a.num_ * b.den_, a.den_ * b.num_);
    }

    friend RationalExpr operator*(double c, const RationalExpr& r) {
        return RationalExpr(GenPoly::constant(c) * r.num_, r.den_);
    }

    // Quotient rule on the stored (unreduced) representation.
    RationalExpr diff(const VarId& v) const {
        GenPoly dn = num_.diff(v);
        if (den_is_one()) return RationalExpr(std::move(dn), den_);
        GenPoly dd = den_.diff(v);
        return RationalExpr(dn * den_ - num_ * dd, den_ * den_);
    }

    double eval(const EvalPoint& x) const {
        double d = den_.eval(x);
        if (d == 0.0) throw DegenerateMetric("expression denominator vanished at sample point");
        return num_.eval(x) / d;
    }

    // Evaluate without throwing on a vanishing denominator (returns ±inf/nan);
    // used by sweep code that handles poles explicitly.
    double eval_unchecked(const EvalPoint& x) const { return num_.eval(x) / den_.eval(x); }

    RationalExpr substitute(const std::map<VarId, double>& fixed) const {
        return RationalExpr(num_.substitute(fixed), den_.substitute(fixed));
    }

    std::set<VarId> variables() const {
        std::set<VarId> vs = num_.variables();
        for (const auto& v : den_.variables()) vs.insert(v);
        return vs;
    }

    std::size_t term_count() const { return num_.term_count() + den_.term_count(); }

private:
    GenPoly num_;
    GenPoly den_;
};

}  // namespace geotherm
