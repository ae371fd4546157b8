#pragma once

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "geotherm/error.hpp"
#include "geotherm/poly.hpp"

namespace geotherm {

// Text form of a GenPoly. Grammar (whitespace ignored):
//
//   poly     := [sign] term { sign term }
//   term     := factor { '*' factor }
//   factor   := number | ident [ '^' exponent ]
//   exponent := '(' signed ')' | signed
//   signed   := ['+'|'-'] (int '/' int | decimal)
//
// Coefficients are decimal literals (scientific notation allowed); exponents
// are rationals a/b or decimal literals, which are converted to exact
// rationals over a power of ten. display() emits this grammar back with
// exponents as `^(a/b)`, so display/parse round-trips structurally.

namespace detail {

class PolyParser {
public:
    PolyParser(std::string_view text, const std::set<std::string>* allowed)
        : text_(text), allowed_(allowed) {}

    GenPoly parse() {
        skip_ws();
        if (eof()) throw SyntaxError("empty expression", pos_);
        GenPoly result;
        double sign = 1.0;
        if (peek() == '+' || peek() == '-') sign = (get() == '-') ? -1.0 : 1.0;
        result = result + parse_term(sign);
        skip_ws();
        while (!eof()) {
            char c = peek();
            if (c != '+' && c != '-')
                throw SyntaxError(std::string("expected '+' or '-', got '") + c + "'", pos_);
            get();
            result = result + parse_term(c == '-' ? -1.0 : 1.0);
            skip_ws();
        }
        return result;
    }

private:
    bool eof() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }
    char get() { return text_[pos_++]; }
    void skip_ws() {
        while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
    }

    GenPoly parse_term(double sign) {
        GenPoly term = GenPoly::constant(sign);
        term = term * parse_factor();
        skip_ws();
        while (!eof() && peek() == '*') {
            get();
            term = term * parse_factor();
            skip_ws();
        }
        return term;
    }

    GenPoly parse_factor() {
        skip_ws();
        if (eof()) throw SyntaxError("expected factor", pos_);
        char c = peek();
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            return GenPoly::constant(parse_number());
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string name = parse_ident();
            if (allowed_ && allowed_->count(name) == 0) throw UnknownVariable(name);
            Rational exponent(1);
            skip_ws();
            if (!eof() && peek() == '^') {
                get();
                exponent = parse_exponent();
            }
            return GenPoly::variable(VarId(name), exponent);
        }
        throw SyntaxError(std::string("unexpected character '") + c + "'", pos_);
    }

    std::string parse_ident() {
        std::size_t start = pos_;
        while (!eof() &&
               (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_'))
            ++pos_;
        return std::string(text_.substr(start, pos_ - start));
    }

    // Coefficient literal: delegate to from_chars (accepts scientific notation).
    double parse_number() {
        const char* begin = text_.data() + pos_;
        const char* end = text_.data() + text_.size();
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc() || ptr == begin)
            throw SyntaxError("malformed number", pos_);
        pos_ = static_cast<std::size_t>(ptr - text_.data());
        return value;
    }

    Rational parse_exponent() {
        skip_ws();
        if (eof()) throw SyntaxError("expected exponent", pos_);
        if (peek() == '(') {
            get();
            Rational r = parse_signed_rational();
            skip_ws();
            if (eof() || peek() != ')') throw SyntaxError("expected ')'", pos_);
            get();
            return r;
        }
        return parse_signed_rational();
    }

    Rational parse_signed_rational() {
        skip_ws();
        long long sign = 1;
        if (!eof() && (peek() == '+' || peek() == '-')) sign = (get() == '-') ? -1 : 1;
        Rational mag = parse_unsigned_rational();
        return Rational(sign) * mag;
    }

    // int '/' int, or a decimal literal turned into digits/10^k exactly.
    Rational parse_unsigned_rational() {
        skip_ws();
        std::size_t start = pos_;
        long long int_part = parse_int_digits();
        skip_ws();
        if (!eof() && peek() == '/') {
            get();
            skip_ws();
            long long den = parse_int_digits();
            if (den == 0) throw SyntaxError("zero denominator in exponent", start);
            return Rational(int_part, den);
        }
        if (!eof() && peek() == '.') {
            get();
            long long digits = int_part;
            long long scale = 1;
            bool any = false;
            while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) {
                int d = get() - '0';
                if (digits > (std::numeric_limits<long long>::max() - d) / 10 ||
                    scale > std::numeric_limits<long long>::max() / 10)
                    throw SyntaxError("exponent literal too long", start);
                digits = digits * 10 + d;
                scale *= 10;
                any = true;
            }
            if (!any) throw SyntaxError("malformed decimal exponent", start);
            return Rational(digits, scale);
        }
        return Rational(int_part);
    }

    long long parse_int_digits() {
        skip_ws();
        if (eof() || !std::isdigit(static_cast<unsigned char>(peek())))
            throw SyntaxError("expected integer", pos_);
        long long v = 0;
        while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) {
            int d = get() - '0';
            if (v > (std::numeric_limits<long long>::max() - d) / 10)
                throw SyntaxError("integer too large", pos_);
            v = v * 10 + d;
        }
        return v;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    const std::set<std::string>* allowed_;
};

inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace detail

// Parse the grammar above. If `allowed` is supplied, any other identifier
// raises UnknownVariable.
inline GenPoly poly_parse(std::string_view text,
                          const std::set<std::string>* allowed = nullptr) {
    return detail::PolyParser(text, allowed).parse();
}

inline GenPoly poly_parse(std::string_view text, const std::set<std::string>& allowed) {
    return poly_parse(text, &allowed);
}

// Emit the grammar back. Coefficients use shortest round-trip form; exponents
// print as `^e` for small positive integers and `^(a/b)` otherwise.
inline std::string display(const GenPoly& p) {
    if (p.is_zero()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [exps, coeff] : p.terms()) {
        double c = coeff;
        if (first) {
            if (c < 0) {
                out += "-";
                c = -c;
            }
        } else {
            out += (c < 0) ? " - " : " + ";
            c = std::abs(c);
        }
        first = false;
        out += detail::format_double(c);
        for (const auto& [v, e] : exps) {
            out += "*";
            out += v.name;
            if (e == Rational(1)) continue;
            out += "^";
            if (e.is_integer() && e.num() > 0)
                out += e.str();
            else
                out += "(" + e.str() + ")";
        }
    }
    return out;
}

}  // namespace geotherm
