#include <doctest.h>

#include <cmath>
#include <limits>

#include "anomaly/circle.hpp"
#include "support.hpp"

using namespace anomaly;
using anomaly::testing::Gen;

namespace {

/// Signed difference y - x on the circle of period pi, in [-pi/2, pi/2).
double signed_gap(double x, double y) {
    double d = std::fmod(y - x + kPi / 2, kPi);
    if (d < 0) d += kPi;
    return d - kPi / 2;
}

Unimodular2x2 random_unimodular(Gen& gen, double range) { return exponential(1.0, gen.generator(range)); }

}  // namespace

TEST_CASE("Angle reduction") {
    CHECK(Angle(0.0).value() == 0.0);
    CHECK(Angle(kPi).value() == 0.0);
    CHECK(Angle(-0.1).value() == doctest::Approx(kPi - 0.1).epsilon(1e-15));
    CHECK(Angle(7 * kPi + 0.3).value() == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(Angle(-1e-20).value() == 0.0);
    CHECK_THROWS_AS(Angle{std::nan("")}, Error);
    CHECK_THROWS_AS(Angle{std::numeric_limits<double>::infinity()}, Error);
    CHECK(Angle::distance(Angle(0.1), Angle(kPi - 0.1)) == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("property: Angle stays in [0, pi)") {
    Gen gen(31);
    for (int i = 0; i < 10000; ++i) {
        const double t = gen.uniform(-1e6, 1e6);
        const double v = Angle(t).value();
        CHECK(v >= 0.0);
        CHECK(v < kPi);
        CHECK(std::abs(std::sin(v - t)) <= 1e-9);
    }
}

TEST_CASE("angle_of_vector") {
    CHECK_THROWS_AS(angle_of_vector(0.0, 0.0), Error);
    CHECK(angle_of_vector(-1.0, 0.0).value() == 0.0);
    CHECK(angle_of_vector(0.0, -1.0).value() == doctest::Approx(kPi / 2).epsilon(1e-15));
    CHECK(angle_of_vector(1.0, -1.0).value() == doctest::Approx(3 * kPi / 4).epsilon(1e-15));
}

TEST_CASE("BasisChange rejects singular matrices") {
    CHECK_THROWS_AS(BasisChange(Mat2{1, 2, 2, 4}, BasisChange::Kind::Custom), Error);
    CHECK_NOTHROW(BasisChange(Mat2{2, 0, 0, 3}, BasisChange::Kind::Custom));
}

TEST_CASE("property: projective action is a cocycle and gains add") {
    Gen gen(32);
    for (int i = 0; i < 2000; ++i) {
        const Unimodular2x2 A = random_unimodular(gen, 1.5), B = random_unimodular(gen, 1.5);
        const Angle t(gen.uniform(0, kPi));
        const Angle direct = projective_act(B * A, t);
        const Angle stepwise = projective_act(B, projective_act(A, t));
        CHECK(Angle::distance(direct, stepwise) <= 1e-10);
        const double g = log_norm_gain(B * A, t);
        const double g2 = log_norm_gain(A, t) + log_norm_gain(B, projective_act(A, t));
        CHECK(std::abs(g - g2) <= 1e-10 * std::max(1.0, std::abs(g)));
    }
}

TEST_CASE("property: p_function is the first-order projective velocity") {
    Gen gen(33);
    for (int i = 0; i < 200; ++i) {
        const TracelessGenerator P = gen.generator(2.0);
        const Angle t(gen.uniform(0, kPi));
        const double h = 1e-5;
        const double fd = (signed_gap(t, projective_act(exponential(h, P), t)) -
                           signed_gap(t, projective_act(exponential(-h, P), t))) /
                          (2 * h);
        CHECK(fd == doctest::Approx(p_function(P, t)).epsilon(1e-7).scale(1.0));
        const double dp = (p_function(P, Angle(t + 1e-6)) - p_function(P, Angle(t - 1e-6))) / 2e-6;
        CHECK(dp == doctest::Approx(p_derivative(P, t)).epsilon(1e-6).scale(1.0));
    }
}

TEST_CASE("property: drift expansion is accurate to third order") {
    Gen gen(34);
    for (int trial = 0; trial < 20; ++trial) {
        const Ensemble E = gen.ensemble(3, 1.0, true);
        const Angle t(gen.uniform(0, kPi));
        auto residual = [&](double lambda) {
            double mean = 0.0;
            for (const auto& a : E.atoms()) {
                mean += a.weight * signed_gap(t, projective_act(build_transfer(lambda, a.P, a.Q), t));
            }
            return mean - drift_expansion(E, lambda, t);
        };
        const double r1 = residual(0.02), r2 = residual(0.01);
        // third order: halving lambda divides the residual by about 8
        CHECK(std::abs(r1) <= 50 * 0.02 * 0.02 * 0.02);
        if (std::abs(r2) > 1e-12) {
            const double ratio = r1 / r2;
            CHECK(ratio > 6.0);
            CHECK(ratio < 10.0);
        }
    }
}

TEST_CASE("zoom map") {
    CHECK_THROWS_AS(zoom(0.0, Angle(0.3)), Error);
    CHECK_THROWS_AS(unzoom(-1.0, Angle(0.3)), Error);
    CHECK(zoom(0.01, Angle(0.0)).value() == 0.0);
    CHECK(zoom(0.01, Angle(kPi / 2)).value() == doctest::Approx(kPi / 2).epsilon(1e-15));
    CHECK(zoom(1.0, Angle(0.7)).value() == doctest::Approx(0.7).epsilon(1e-15));
    // atan(lambda^{-1/2} tan theta) applied to the zoomed point gives back theta_hat
    const double lambda = 0.04;
    const double th = 1.2;
    CHECK(std::tan(unzoom(lambda, Angle(th)).value()) == doctest::Approx(std::sqrt(lambda) * std::tan(th)).epsilon(1e-13));
}

TEST_CASE("property: zoom and unzoom are inverse bijections") {
    Gen gen(35);
    for (int i = 0; i < 5000; ++i) {
        const double lambda = std::pow(10.0, gen.uniform(-6, 0));
        const Angle t(gen.uniform(0, kPi));
        CHECK(Angle::distance(unzoom(lambda, zoom(lambda, t)), t) <= 1e-12);
        CHECK(Angle::distance(zoom(lambda, unzoom(lambda, t)), t) <= 1e-12);
    }
}

TEST_CASE("property: conjugation commutes with exponentiation") {
    Gen gen(36);
    for (int i = 0; i < 500; ++i) {
        const Mat2 M{gen.uniform(0.5, 2), gen.uniform(-1, 1), gen.uniform(-1, 1), gen.uniform(0.5, 2)};
        if (std::abs(M.det()) < 0.1) continue;
        const TracelessGenerator G = gen.generator(1.0);
        const Mat2 lhs = conjugate(M, exponential(1.0, G)).matrix();
        const Mat2 rhs = exponential(1.0, conjugate(M, G)).matrix();
        CHECK(testing::max_entry_diff(lhs, rhs) <= 1e-12 * std::max(1.0, lhs.max_abs()));
        CHECK(conjugate(M, G).det() == doctest::Approx(G.det()).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("conjugate_ensemble maps every Q coefficient") {
    const Mat2 M{2, 0, 0, 0.5};
    const Ensemble E(std::vector<Atom>{{1.0, {0, 1, 1}, QPolynomial({{0, 1, 0}, {0, 0, 1}})}});
    const Ensemble C = conjugate_ensemble(BasisChange(M, BasisChange::Kind::Custom), E);
    CHECK(C[0].P == TracelessGenerator{0, 4, 0.25});
    CHECK(C[0].Q.coefficients()[0] == TracelessGenerator{0, 4, 0});
    CHECK(C[0].Q.coefficients()[1] == TracelessGenerator{0, 0, 0.25});
}
