#pragma once

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "geotherm/error.hpp"
#include "geotherm/rational.hpp"

namespace geotherm {

// Named coordinate on the equilibrium manifold ("S", "Q", "l", ...).
struct VarId {
    std::string name;

    VarId() = default;
    explicit VarId(std::string n) : name(std::move(n)) {}

    friend bool operator==(const VarId&, const VarId&) = default;
    friend auto operator<=>(const VarId& a, const VarId& b) { return a.name <=> b.name; }
};

inline const VarId kS{"S"};
inline const VarId kQ{"Q"};
inline const VarId kL{"l"};

// Exponent vector of one monomial; variables with exponent 0 are absent.
using ExpVec = std::map<VarId, Rational>;

struct Monomial {
    double coeff = 0.0;
    ExpVec exponents;
};

// Strictly positive evaluation point. Fractional exponents require positive bases,
// and the physical domain is S,Q,l > 0.
class EvalPoint {
public:
    EvalPoint() = default;
    EvalPoint(std::initializer_list<std::pair<const VarId, double>> init) {
        for (const auto& [v, x] : init) set(v, x);
    }

    void set(const VarId& v, double value) {
        if (!(value > 0.0))
            throw NonPositiveBase("coordinate " + v.name + " must be > 0, got " +
                                  std::to_string(value));
        values_[v] = value;
    }

    double at(const VarId& v) const {
        auto it = values_.find(v);
        if (it == values_.end()) throw MissingVariable(v.name);
        return it->second;
    }

    bool has(const VarId& v) const { return values_.count(v) != 0; }
    const std::map<VarId, double>& values() const { return values_; }

private:
    std::map<VarId, double> values_;
};

namespace detail {

// Global cap on terms per polynomial; operations throw ExpressionBlowup past it.
inline std::atomic<std::size_t>& term_limit_slot() {
    static std::atomic<std::size_t> limit{200000};
    return limit;
}

inline double int_pow(double base, long long e) {
    if (e < 0) return 1.0 / int_pow(base, -e);
    double r = 1.0, b = base;
    while (e > 0) {
        if (e & 1) r *= b;
        b *= b;
        e >>= 1;
    }
    return r;
}

inline double pow_rational(double base, const Rational& e) {
    if (e.is_zero()) return 1.0;
    if (e.is_integer()) return int_pow(base, e.num());
    return std::pow(base, e.to_double());
}

}  // namespace detail

inline std::size_t term_limit() { return detail::term_limit_slot().load(); }
inline void set_term_limit(std::size_t limit) { detail::term_limit_slot().store(limit); }

// Generalized polynomial: finite sum of monomials c * prod v^e with real
// coefficients and exact rational exponents. Canonical form: terms keyed by
// exponent vector (exponent-zero entries removed), coefficients merged, exact
// zeros dropped. The canonical form is unique for a given value, so structural
// comparison decides equality up to coefficient roundoff.
class GenPoly {
public:
    GenPoly() = default;

    static GenPoly zero() { return GenPoly(); }

    static GenPoly constant(double c) {
        GenPoly p;
        if (c != 0.0) p.terms_[ExpVec{}] = c;
        return p;
    }

    static GenPoly variable(const VarId& v, Rational exponent = Rational(1)) {
        return monomial(1.0, v, exponent);
    }

    static GenPoly monomial(double coeff, const VarId& v, Rational exponent) {
        ExpVec e;
        if (!exponent.is_zero()) e[v] = exponent;
        return monomial(coeff, std::move(e));
    }

    static GenPoly monomial(double coeff, ExpVec exponents) {
        GenPoly p;
        if (coeff != 0.0 && std::abs(coeff) >= kCoeffDropThreshold) {
            std::erase_if(exponents, [](const auto& kv) { return kv.second.is_zero(); });
            p.terms_[std::move(exponents)] = coeff;
        }
        return p;
    }

    bool is_zero() const { return terms_.empty(); }
    std::size_t term_count() const { return terms_.size(); }
    const std::map<ExpVec, double>& terms() const { return terms_; }

    std::set<VarId> variables() const {
        std::set<VarId> out;
        for (const auto& [e, c] : terms_)
            for (const auto& [v, r] : e) out.insert(v);
        return out;
    }

    GenPoly operator-() const {
        GenPoly p = *this;
        for (auto& [e, c] : p.terms_) c = -c;
        return p;
    }

    friend GenPoly operator+(const GenPoly& a, const GenPoly& b) {
        GenPoly r = a;
        for (const auto& [e, c] : b.terms_) r.add_term(e, c);
        r.check_size();
        return r;
    }

    friend GenPoly operator-(const GenPoly& a, const GenPoly& b) { return a + (-b); }

    friend GenPoly operator*(const GenPoly& a, const GenPoly& b) {
        GenPoly r;
        for (const auto& [ea, ca] : a.terms_) {
            for (const auto& [eb, cb] : b.terms_) {
                ExpVec e = ea;
                for (const auto& [v, re] : eb) {
                    auto [it, fresh] = e.emplace(v, re);
                    if (!fresh) {
                        it->second = it->second + re;
                        if (it->second.is_zero()) e.erase(it);
                    }
                }
                r.add_term(e, ca * cb);
            }
        }
        r.check_size();
        return r;
    }

    friend GenPoly operator*(double c, const GenPoly& p) { return GenPoly::constant(c) * p; }
    friend GenPoly operator*(const GenPoly& p, double c) { return GenPoly::constant(c) * p; }

    // Termwise power rule; terms without the variable vanish.
    GenPoly diff(const VarId& v) const {
        GenPoly r;
        for (const auto& [e, c] : terms_) {
            auto it = e.find(v);
            if (it == e.end()) continue;
            Rational ev = it->second;
            ExpVec shifted = e;
            Rational down = ev - Rational(1);
            if (down.is_zero())
                shifted.erase(v);
            else
                shifted[v] = down;
            r.add_term(shifted, c * ev.to_double());
        }
        r.check_size();
        return r;
    }

    double eval(const EvalPoint& x) const {
        double sum = 0.0;
        for (const auto& [e, c] : terms_) {
            double t = c;
            for (const auto& [v, r] : e) t *= detail::pow_rational(x.at(v), r);
            sum += t;
        }
        return sum;
    }

    // Substitute fixed positive values for a subset of the variables.
    GenPoly substitute(const std::map<VarId, double>& fixed) const {
        GenPoly r;
        for (const auto& [e, c] : terms_) {
            double coeff = c;
            ExpVec rest;
            for (const auto& [v, re] : e) {
                auto it = fixed.find(v);
                if (it == fixed.end()) {
                    rest[v] = re;
                } else {
                    if (!(it->second > 0.0))
                        throw NonPositiveBase("substituted value for " + v.name + " must be > 0");
                    coeff *= detail::pow_rational(it->second, re);
                }
            }
            r.add_term(rest, coeff);
        }
        r.check_size();
        return r;
    }

    // Replace v -> lambda * v (coordinate rescaling); lambda > 0.
    GenPoly scale_var(const VarId& v, double lambda) const {
        if (!(lambda > 0.0)) throw NonPositiveBase("scale factor must be > 0");
        GenPoly r;
        for (const auto& [e, c] : terms_) {
            double coeff = c;
            auto it = e.find(v);
            if (it != e.end()) coeff *= detail::pow_rational(lambda, it->second);
            r.add_term(e, coeff);
        }
        return r;
    }

    // Exact structural comparison (exponent vectors and bitwise coefficients).
    friend bool operator==(const GenPoly& a, const GenPoly& b) { return a.terms_ == b.terms_; }

    // Structural comparison tolerating coefficient roundoff: exponent vectors
    // must match exactly, coefficients within rel_tol of the larger scale.
    bool approx_equal(const GenPoly& other, double rel_tol = 1e-12) const {
        double scale = 0.0;
        for (const auto& [e, c] : terms_) scale = std::max(scale, std::abs(c));
        for (const auto& [e, c] : other.terms_) scale = std::max(scale, std::abs(c));
        if (scale == 0.0) return true;
        const double tol = rel_tol * scale;
        auto ia = terms_.begin();
        auto ib = other.terms_.begin();
        while (ia != terms_.end() || ib != other.terms_.end()) {
            if (ib == other.terms_.end() || (ia != terms_.end() && ia->first < ib->first)) {
                if (std::abs(ia->second) > tol) return false;
                ++ia;
            } else if (ia == terms_.end() || ib->first < ia->first) {
                if (std::abs(ib->second) > tol) return false;
                ++ib;
            } else {
                if (std::abs(ia->second - ib->second) > tol) return false;
                ++ia;
                ++ib;
            }
        }
        return true;
    }

private:
    // Coefficients below this magnitude are treated as noise and dropped.
    static constexpr double kCoeffDropThreshold = 1e-300;

    void add_term(const ExpVec& e, double c) {
        if (c == 0.0 || std::abs(c) < kCoeffDropThreshold) return;
        auto [it, fresh] = terms_.emplace(e, c);
        if (!fresh) {
            it->second += c;
            if (it->second == 0.0 || std::abs(it->second) < kCoeffDropThreshold) terms_.erase(it);
        }
    }

    void check_size() const {
        const std::size_t limit = term_limit();
        if (terms_.size() > limit) throw ExpressionBlowup(terms_.size(), limit);
    }

    std::map<ExpVec, double> terms_;
};

}  // namespace geotherm
