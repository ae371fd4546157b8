// Curvature engine: inverses, connection coefficients, scalar curvature,
// and agreement with a purely numeric finite-difference oracle.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "geotherm/metric.hpp"

using namespace geotherm;

namespace {

struct Rng {
    std::mt19937 eng;
    explicit Rng(std::uint32_t seed) : eng(seed) {}
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * (eng() * (1.0 / 4294967296.0));
    }
    int pick(int n) { return static_cast<int>(eng() % static_cast<std::uint32_t>(n)); }
};

RationalExpr re(GenPoly p) { return RationalExpr(std::move(p)); }

MetricField diag2(GenPoly g00, GenPoly g11) {
    return MetricField({kS, kQ}, {{re(std::move(g00)), RationalExpr::zero()},
                                  {RationalExpr::zero(), re(std::move(g11))}});
}

// Poincaré upper half-plane in (S, Q), S playing the vertical coordinate.
MetricField poincare() {
    return diag2(GenPoly::variable(kS, Rational(-2)), GenPoly::variable(kS, Rational(-2)));
}

}  // namespace

TEST_CASE("metric construction validates shape and symmetry") {
    const RationalExpr one(GenPoly::constant(1.0));
    const RationalExpr s(GenPoly::variable(kS));
    // wrong dimension
    CHECK_THROWS_AS(MetricField({kS}, {{one}}), InvalidParameter);
    // ragged rows
    CHECK_THROWS_AS(MetricField({kS, kQ}, {{one, one}, {one}}), InvalidParameter);
    // structural asymmetry
    CHECK_THROWS_AS(MetricField({kS, kQ}, {{one, s}, {one, one}}), InvalidParameter);
    // symmetric is fine
    CHECK_NOTHROW(MetricField({kS, kQ}, {{one, s}, {s, one}}));
}

TEST_CASE("2x2 determinant and adjugate inverse") {
    const GenPoly a = GenPoly::variable(kS);
    const GenPoly b = GenPoly::variable(kQ);
    MetricField g({kS, kQ}, {{re(a), re(b)}, {re(b), re(a)}});
    const RationalExpr det = metric_det(g);
    const EvalPoint x{{kS, 3.0}, {kQ, 2.0}};
    CHECK(det.eval(x) == Catch::Approx(9.0 - 4.0));

    const auto inv = metric_inverse(g);
    // g · g⁻¹ = I numerically
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < 2; ++k)
                sum += g.component(i, k).eval(x) * inv[k][j].eval(x);
            CHECK(sum == Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-12));
        }
}

TEST_CASE("3x3 inverse against the numeric inverse") {
    Rng rng(711);
    // dense symmetric 3x3 with polynomial entries
    const GenPoly s = GenPoly::variable(kS), q = GenPoly::variable(kQ),
                  l = GenPoly::variable(kL);
    MetricField g({kS, kQ, kL},
                  {{re(s * s + GenPoly::constant(2.0)), re(q), re(l)},
                   {re(q), re(q * q + GenPoly::constant(3.0)), re(s)},
                   {re(l), re(s), re(l * l + GenPoly::constant(4.0))}});
    const auto inv = metric_inverse(g);
    for (int trial = 0; trial < 20; ++trial) {
        const EvalPoint x{{kS, rng.uniform(0.5, 2.0)},
                          {kQ, rng.uniform(0.5, 2.0)},
                          {kL, rng.uniform(0.5, 2.0)}};
        const auto m = g.eval(x);
        const auto numeric = detail::invert_numeric(m);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                CHECK(inv[i][j].eval(x) == Catch::Approx(numeric[i][j]).margin(1e-9));
    }
}

TEST_CASE("constant metrics are flat") {
    MetricField g = diag2(GenPoly::constant(2.0), GenPoly::constant(5.0));
    const CurvatureBundle bundle = curvature_bundle(g);
    // the connection vanishes structurally
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b)
            for (std::size_t c = 0; c < 2; ++c)
                CHECK(bundle.christoffel[a][b][c].num().is_zero());
    Rng rng(722);
    for (int k = 0; k < 20; ++k) {
        const EvalPoint x{{kS, rng.uniform(0.5, 5.0)}, {kQ, rng.uniform(0.5, 5.0)}};
        CHECK(std::abs(bundle.scalar.eval(x)) < 1e-9);
    }
}

TEST_CASE("half-plane connection and curvature") {
    MetricField g = poincare();
    const CurvatureBundle bundle = curvature_bundle(g);
    const EvalPoint x{{kS, 2.0}, {kQ, 1.0}};
    // classical values: Γ^S_SS = −1/S, Γ^S_QQ = 1/S, Γ^Q_SQ = −1/S
    CHECK(bundle.christoffel[0][0][0].eval(x) == Catch::Approx(-0.5).margin(1e-12));
    CHECK(bundle.christoffel[0][1][1].eval(x) == Catch::Approx(0.5).margin(1e-12));
    CHECK(bundle.christoffel[1][0][1].eval(x) == Catch::Approx(-0.5).margin(1e-12));
    CHECK(bundle.christoffel[1][1][0].eval(x) == Catch::Approx(-0.5).margin(1e-12));
    CHECK(bundle.christoffel[1][0][0].num().is_zero());
    // constant negative curvature, R = −2 at any point
    Rng rng(733);
    for (int k = 0; k < 10; ++k) {
        const EvalPoint p{{kS, rng.uniform(0.2, 8.0)}, {kQ, rng.uniform(0.2, 8.0)}};
        CHECK(bundle.scalar.eval(p) == Catch::Approx(-2.0).epsilon(1e-9));
    }
}

TEST_CASE("indefinite conformally flat metric agrees with the oracle") {
    // f · diag(−2, 2) with f = 2S² + 2Q²: the Lorentzian signature exercises
    // the sign handling that a Riemannian example would miss.
    const GenPoly f = GenPoly::monomial(2.0, kS, Rational(2)) +
                      GenPoly::monomial(2.0, kQ, Rational(2));
    MetricField g = diag2(-2.0 * f, 2.0 * f);
    const RationalExpr R = curvature_scalar(g);
    Rng rng(744);
    for (int k = 0; k < 10; ++k) {
        const EvalPoint x{{kS, rng.uniform(0.8, 2.5)}, {kQ, rng.uniform(0.8, 2.5)}};
        const double sym = R.eval(x);
        const double orc = curvature_numeric_oracle(g, x);
        CHECK(std::abs(sym - orc) < 1e-5 * std::max(1.0, std::abs(sym)));
    }
}

TEST_CASE("random small metrics agree with the oracle") {
    Rng rng(755);
    const std::vector<Rational> pool = {Rational(1, 2), Rational(1), Rational(3, 2),
                                        Rational(2)};
    int done = 0;
    while (done < 50) {
        auto small_poly = [&] {
            GenPoly p = GenPoly::constant(rng.uniform(0.5, 2.0));
            ExpVec e;
            e[kS] = pool[static_cast<std::size_t>(rng.pick(4))];
            if (rng.pick(2)) e[kQ] = pool[static_cast<std::size_t>(rng.pick(4))];
            return p + GenPoly::monomial(rng.uniform(0.5, 2.0), std::move(e));
        };
        MetricField g = diag2(small_poly(), small_poly());
        const RationalExpr R = curvature_scalar(g);
        const EvalPoint x{{kS, rng.uniform(0.8, 2.0)}, {kQ, rng.uniform(0.8, 2.0)}};
        const double sym = R.eval(x);
        const double orc = curvature_numeric_oracle(g, x);
        CHECK(std::abs(sym - orc) < 1e-4 * std::abs(sym) + 1e-8);
        ++done;
    }
}

TEST_CASE("two-dimensional curvature identity R det g = 2 R_1212") {
    Rng rng(766);
    // a handful of structurally different metrics
    std::vector<MetricField> gs;
    gs.push_back(poincare());
    gs.push_back(diag2(GenPoly::constant(1.0) + GenPoly::variable(kS, Rational(2)),
                       GenPoly::constant(1.0) + GenPoly::variable(kQ, Rational(2))));
    const GenPoly f = GenPoly::monomial(2.0, kS, Rational(2)) +
                      GenPoly::monomial(2.0, kQ, Rational(2));
    gs.push_back(diag2(-2.0 * f, 2.0 * f));
    for (auto& g : gs) {
        const CurvatureBundle bundle = curvature_bundle(g);
        const RationalExpr det = metric_det(g);
        const RationalExpr r1212 = riemann_lowered(g, bundle, 0, 1, 0, 1);
        for (int k = 0; k < 10; ++k) {
            const EvalPoint x{{kS, rng.uniform(0.7, 2.5)}, {kQ, rng.uniform(0.7, 2.5)}};
            const double lhs = bundle.scalar.eval(x) * det.eval(x);
            const double rhs = 2.0 * r1212.eval(x);
            CHECK(std::abs(lhs - rhs) < 1e-8 * (std::abs(lhs) + std::abs(rhs) + 1.0));
        }
    }
}

TEST_CASE("scalar curvature is covariant under coordinate scaling") {
    // Pull back by S → λS: g'_SS(S,Q) = λ² g_SS(λS,Q) etc. The scalar then
    // satisfies R'(S,Q) = R(λS,Q); a convention slip anywhere breaks this.
    const double lambda = 2.0;
    const GenPoly f = GenPoly::monomial(1.0, kS, Rational(2)) +
                      GenPoly::monomial(3.0, kQ, Rational(2)) + GenPoly::constant(1.0);
    MetricField g = diag2(f, f + GenPoly::variable(kS));

    auto pulled = [&](std::size_t i, std::size_t j) {
        const double jac = (i == 0 ? lambda : 1.0) * (j == 0 ? lambda : 1.0);
        const GenPoly num = g.component(i, j).num().scale_var(kS, lambda);
        return RationalExpr(jac * num);
    };
    MetricField gp({kS, kQ}, {{pulled(0, 0), pulled(0, 1)}, {pulled(1, 0), pulled(1, 1)}});

    const RationalExpr R = curvature_scalar(g);
    const RationalExpr Rp = curvature_scalar(gp);
    Rng rng(777);
    for (int k = 0; k < 10; ++k) {
        const EvalPoint x{{kS, rng.uniform(0.5, 1.8)}, {kQ, rng.uniform(0.5, 1.8)}};
        EvalPoint xs = x;
        xs.set(kS, lambda * x.at(kS));
        CHECK(Rp.eval(x) ==
              Catch::Approx(R.eval(xs)).epsilon(1e-6).margin(1e-9));
    }
}

TEST_CASE("degenerate metrics are rejected at evaluation") {
    // det = S² − S² = 0 on the whole domain only if components coincide;
    // instead make a metric singular at a point: diag(S−1, 1) at S = 1.
    MetricField g = diag2(GenPoly::variable(kS) - GenPoly::constant(1.0),
                          GenPoly::constant(1.0));
    const auto inv = metric_inverse(g);
    CHECK_THROWS_AS(inv[0][0].eval(EvalPoint{{kS, 1.0}, {kQ, 1.0}}), DegenerateMetric);
    CHECK_THROWS_AS(curvature_numeric_oracle(g, EvalPoint{{kS, 1.0}, {kQ, 1.0}}),
                    DegenerateMetric);
    // the numeric stencil refuses to cross the domain boundary: a full-width
    // relative step lands exactly on zero
    MetricField ok = diag2(GenPoly::variable(kS), GenPoly::constant(1.0));
    CHECK_THROWS_AS(curvature_numeric_oracle(ok, EvalPoint{{kS, 0.5}, {kQ, 1.0}}, 1.0),
                    StencilOutOfDomain);
}
