#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <functional>
#include <vector>

#include "anomaly/perturbation.hpp"
#include "support.hpp"

using namespace anomaly;
using anomaly::testing::Gen;

namespace {

// Direct trigonometric forms, written out independently of the library.
double p_of(const TracelessGenerator& P, double t) {
    const double s = std::sin(t), c = std::cos(t);
    return -P.a * 2 * s * c - P.b * s * s + P.c * c * c;
}

double h_of(const TracelessGenerator& P, double t) {
    return P.a * std::cos(2 * t) + 0.5 * (P.b + P.c) * std::sin(2 * t);
}

double weighted(const Ensemble& E, const std::function<double(const Atom&)>& f) {
    double acc = 0;
    for (const auto& atom : E.atoms()) acc += atom.weight * f(atom);
    return acc;
}

double D_of(const Ensemble& E, double t) {
    return 0.5 * weighted(E, [&](const Atom& a) { return p_of(a.P, t) * p_of(a.P, t); });
}

/// Coefficient of lambda^2 in E[(1/2) log |T e_theta|^2] by symmetric finite
/// differences of the Taylor-series transfer matrix (odd orders cancel),
/// Richardson-extrapolated in lambda.
double gain_coefficient_fd(const Ensemble& E, double t, double lambda = 1e-3) {
    auto gain = [&](const Atom& a, double l) {
        const Mat2 T = testing::taylor_exp(l * Mat2::from(a.P + l * a.Q.leading()));
        const double x = T.m11 * std::cos(t) + T.m12 * std::sin(t);
        const double y = T.m21 * std::cos(t) + T.m22 * std::sin(t);
        return 0.5 * std::log(x * x + y * y);
    };
    auto symmetric = [&](double l) {
        return weighted(E, [&](const Atom& a) { return (gain(a, l) + gain(a, -l)) / (2 * l * l); });
    };
    return (4 * symmetric(lambda) - symmetric(2 * lambda)) / 3;
}

double integrate(const std::function<double(double)>& f, double a, double b, unsigned depth = 4) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, depth, 1e-12);
}

Ensemble vw_ensemble() {
    return Ensemble(std::vector<Atom>{{0.25, {1, 1, -1}, {}},
                                      {0.25, {1, -1, 1}, {}},
                                      {0.25, {-1, 1, -1}, {}},
                                      {0.25, {-1, -1, 1}, {}}});
}

/// D = 1/2 constant and b = 0: the generator is u''/2.
Ensemble isotropic_ensemble() {
    const double r = std::sqrt(2.0);
    return Ensemble(std::vector<Atom>{{0.25, {r, 0, 0}, {}},
                                      {0.25, {-r, 0, 0}, {}},
                                      {0.25, {0, r, r}, {}},
                                      {0.25, {0, -r, -r}, {}}});
}

Ensemble single(const TracelessGenerator& P) { return Ensemble(std::vector<Atom>{{1.0, P, {}}}); }

Mat2 random_basis(Gen& gen) {
    for (;;) {
        const Mat2 M{gen.uniform(-2, 2), gen.uniform(-2, 2), gen.uniform(-2, 2), gen.uniform(-2, 2)};
        if (std::abs(M.det()) > 0.2) return M;
    }
}

/// Centered ensemble with Q = 0 whose E[p^2] is bounded away from zero.
Ensemble random_nondegenerate_centered(Gen& gen) {
    for (;;) {
        std::vector<Atom> atoms;
        const auto w = gen.weights(3);
        for (int i = 0; i < 3; ++i) {
            const TracelessGenerator P = gen.generator(1.0);
            atoms.push_back({w[i] / 2, P, {}});
            atoms.push_back({w[i] / 2, -P, {}});
        }
        Ensemble E(std::move(atoms));
        double lo = 1e300, hi = 0;
        for (int i = 0; i < 512; ++i) {
            lo = std::min(lo, D_of(E, kPi * i / 512));
            hi = std::max(hi, D_of(E, kPi * i / 512));
        }
        if (lo > 0.25 * hi && lo > 0.02) return E;
    }
}

}  // namespace

TEST_CASE("classification examples") {
    CHECK(classify(single({0, -1, 1})).tag == AnomalyTag::Elliptic);
    CHECK(classify(single({0, -4, 1})).eta == doctest::Approx(2.0));
    CHECK(classify(single({1, 0, 0})).tag == AnomalyTag::Hyperbolic);
    CHECK(classify(single({0, 3, 3})).eta == doctest::Approx(3.0));
    CHECK(classify(single({0, 1, 0})).tag == AnomalyTag::Parabolic);
    CHECK(classify(vw_ensemble()).tag == AnomalyTag::Centered);
    CHECK(classify(vw_ensemble()).eta == 0.0);
    CHECK(classify(single({1e-12, 0, 0})).tag == AnomalyTag::Centered);
    CHECK_THROWS_AS(classify(vw_ensemble(), 0.0), Error);
    CHECK(default_classify_tolerance(single({3, 0, 4})) == doctest::Approx(26e-10));
    CHECK(std::string(to_string(AnomalyTag::Hyperbolic)) == "hyperbolic");
}

TEST_CASE("property: classification is conjugation invariant") {
    Gen gen(61);
    for (int i = 0; i < 500; ++i) {
        const Ensemble E = gen.ensemble(static_cast<std::size_t>(gen.integer(1, 4)), 1.0, false);
        const Ensemble C = conjugate_ensemble(BasisChange(random_basis(gen), BasisChange::Kind::Custom), E);
        const AnomalyClass a = classify(E), b = classify(C);
        if (std::abs(ensemble_moments(E).det_mean_P) < 1e-6) continue;
        CHECK(a.tag == b.tag);
        CHECK(b.eta == doctest::Approx(a.eta).epsilon(1e-9));
    }
}

TEST_CASE("property: normal forms") {
    Gen gen(62);
    int elliptic = 0, hyperbolic = 0;
    for (int i = 0; i < 1000; ++i) {
        const Ensemble E = gen.ensemble(static_cast<std::size_t>(gen.integer(1, 4)), 1.0, true);
        const AnomalyClass cls = classify(E);
        const TracelessGenerator m = ensemble_moments(E).mean_P;
        if (std::abs(m.det()) < 1e-4) continue;
        if (cls.tag == AnomalyTag::Elliptic) {
            ++elliptic;
            const NormalForm nf = elliptic_normal_form(E);
            const double s = m.c > 0 ? 1.0 : -1.0;
            CHECK(nf.basis.M.det() == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(nf.basis.M.m11 > 0);
            CHECK(nf.basis.kind == BasisChange::Kind::EllipticNormal);
            const TracelessGenerator got = ensemble_moments(nf.ensemble).mean_P;
            CHECK((got - TracelessGenerator{0, -s * cls.eta, s * cls.eta}).max_abs() <= 1e-10 * std::max(1.0, cls.eta));
            CHECK_THROWS_AS(hyperbolic_normal_form(E), Error);
        } else if (cls.tag == AnomalyTag::Hyperbolic) {
            ++hyperbolic;
            const NormalForm nf = hyperbolic_normal_form(E);
            CHECK(nf.basis.M.det() == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(nf.basis.M.m11 > 0);
            const TracelessGenerator got = ensemble_moments(nf.ensemble).mean_P;
            CHECK((got - TracelessGenerator{cls.eta, 0, 0}).max_abs() <= 1e-10 * std::max(1.0, cls.eta));
            CHECK_THROWS_AS(elliptic_normal_form(E), Error);
        }
    }
    CHECK(elliptic > 50);
    CHECK(hyperbolic > 50);
}

TEST_CASE("elliptic prediction against a quadrature oracle") {
    Gen gen(63);
    int tested = 0;
    while (tested < 50) {
        const Ensemble E = gen.ensemble(static_cast<std::size_t>(gen.integer(2, 4)), 1.0, false);
        if (classify(E).tag != AnomalyTag::Elliptic || ensemble_moments(E).det_mean_P < 1e-2) continue;
        ++tested;
        const PredictionReport r = predict(E);
        const Ensemble N = conjugate_ensemble(r.normal_form, E);
        // mean over theta of Var_P h_P(theta) in normal-form coordinates
        const double oracle = integrate(
                                  [&](double t) {
                                      const double mean = weighted(N, [&](const Atom& a) { return h_of(a.P, t); });
                                      return weighted(N, [&](const Atom& a) { return std::pow(h_of(a.P, t) - mean, 2); });
                                  },
                                  0, kPi) /
                              kPi;
        CHECK(r.cls.tag == AnomalyTag::Elliptic);
        CHECK(r.gamma_leading == doctest::Approx(oracle).epsilon(1e-10));
        CHECK(r.sigma_leading.value() == r.gamma_leading);
        CHECK(r.gamma_exponent == 2.0);
        CHECK(r.flags.empty());
    }
}

TEST_CASE("property: elliptic constant is invariant under basis changes") {
    Gen gen(64);
    int tested = 0;
    while (tested < 100) {
        const Ensemble E = gen.ensemble(3, 1.0, false);
        if (classify(E).tag != AnomalyTag::Elliptic || ensemble_moments(E).det_mean_P < 1e-2) continue;
        const Ensemble C = conjugate_ensemble(BasisChange(random_basis(gen), BasisChange::Kind::Custom), E);
        if (classify(C).tag != AnomalyTag::Elliptic) continue;
        ++tested;
        CHECK(predict_elliptic(C).gamma_leading == doctest::Approx(predict_elliptic(E).gamma_leading).epsilon(1e-8));
    }
}

TEST_CASE("elliptic degenerate and hyperbolic reports") {
    const PredictionReport rot = predict(single({0, -1, 1}));
    CHECK(rot.gamma_leading == doctest::Approx(0.0).scale(1.0));
    CHECK_FALSE(rot.flags.empty());

    const PredictionReport hyp = predict(single({2, 0, 0}));
    CHECK(hyp.cls.tag == AnomalyTag::Hyperbolic);
    CHECK(hyp.gamma_leading == doctest::Approx(2.0));
    CHECK(hyp.gamma_exponent == 1.0);
    CHECK_FALSE(hyp.sigma_leading.has_value());
    CHECK(hyp.sigma_exponent == 1.5);
    CHECK_FALSE(hyp.flags.empty());

    const Ensemble fluct(std::vector<Atom>{{0.5, {1, 1, 0}, {}}, {0.5, {1, -1, 0}, {}}});
    CHECK(predict(fluct).flags.empty());

    CHECK_THROWS_AS(predict(single({0, 1, 0})), Error);
    CHECK_THROWS_AS(predict_centered(single({1, 0, 0})), Error);
    CHECK_THROWS_AS(predict_elliptic(vw_ensemble()), Error);
}

TEST_CASE("generator assembly") {
    CHECK_THROWS_AS(assemble_generator(single({1, 0, 0})), Error);
    // p = -+sin 2theta: E[p^2] vanishes at theta = 0
    const Ensemble degenerate(std::vector<Atom>{{0.5, {1, 0, 0}, {}}, {0.5, {-1, 0, 0}, {}}});
    CHECK_THROWS_AS(assemble_generator(degenerate), NumericalError);
    CHECK_THROWS_AS(predict(degenerate), NumericalError);

    const DiffusionGenerator L = assemble_generator(vw_ensemble());
    for (double t = 0; t < kPi; t += 0.1) CHECK(L.D(t) == doctest::Approx(D_of(vw_ensemble(), t)).epsilon(1e-14));
}

TEST_CASE("uniform density when D is constant and b = 0") {
    const DiffusionGenerator L = assemble_generator(isotropic_ensemble());
    const FourierSeries rho = solve_stationary_density(L, 16);
    CHECK(std::abs(rho.coeff(0).real() - 1 / kPi) <= 1e-14);
    for (int k = 1; k <= 16; ++k) CHECK(std::abs(rho.coeff(k)) <= 1e-14);
    CHECK_THROWS_AS(solve_stationary_density(L, 8), Error);
}

TEST_CASE("Poisson example: f = cos 4theta gives F = -cos 4theta / 8") {
    const DiffusionGenerator L = assemble_generator(isotropic_ensemble());
    const FourierSeries rho = solve_stationary_density(L, 16);
    const FourierSeries F = solve_poisson(L, rho, FourierSeries::cos_mode(2));
    for (int k = -16; k <= 16; ++k) {
        const double expected = (std::abs(k) == 2) ? -1.0 / 16 : 0.0;
        CHECK(std::abs(F.coeff(k) - FourierSeries::complex(expected)) <= 1e-14);
    }
}

TEST_CASE("property: stationary density equals D^{-1/2} / Z when Q = 0") {
    Gen gen(65);
    std::vector<Ensemble> cases{vw_ensemble()};
    for (int i = 0; i < 8; ++i) cases.push_back(random_nondegenerate_centered(gen));
    for (const auto& E : cases) {
        const DiffusionGenerator L = assemble_generator(E);
        const FourierSeries rho = solve_stationary_density(L, 64);
        const double Z = integrate([&](double t) { return 1 / std::sqrt(D_of(E, t)); }, 0, kPi);
        for (int i = 0; i < 37; ++i) {
            const double t = kPi * i / 37;
            CHECK(rho(t) == doctest::Approx(1 / (Z * std::sqrt(D_of(E, t)))).epsilon(1e-9));
        }
        const FourierSeries rho2 = solve_stationary_density(L, 128);
        CHECK((rho2 - rho).sup_norm(1024) <= 1e-8);
        CHECK(apply_adjoint(L, rho).sup_norm(1024) <= 1e-8);
    }
}

TEST_CASE("property: adjoint identity <rho, L u> = 0 and <v, L u> = <L* v, u>") {
    Gen gen(66);
    const Ensemble E = vw_ensemble();
    const DiffusionGenerator L = assemble_generator(E);
    const FourierSeries rho = solve_stationary_density(L, 64);
    auto random_series = [&](int order) {
        FourierSeries u(order);
        u.set_coeff(0, gen.uniform(-1, 1));
        for (int k = 1; k <= order; ++k) {
            const FourierSeries::complex c(gen.uniform(-1, 1), gen.uniform(-1, 1));
            u.set_coeff(k, c);
            u.set_coeff(-k, std::conj(c));
        }
        return u;
    };
    for (int i = 0; i < 20; ++i) {
        const FourierSeries u = random_series(gen.integer(1, 8));
        const FourierSeries v = random_series(gen.integer(1, 8));
        CHECK(std::abs(inner(rho, apply_generator(L, u))) <= 1e-9);
        CHECK(inner(v, apply_generator(L, u)) == doctest::Approx(inner(apply_adjoint(L, v), u)).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("property: centered gain series matches finite differences of the exact gain") {
    Gen gen(67);
    for (int trial = 0; trial < 50; ++trial) {
        const Ensemble E = gen.centered_ensemble(static_cast<std::size_t>(gen.integer(1, 3)), 1.0);
        const FourierSeries f = centered_gain_series(E);
        for (int i = 0; i < 12; ++i) {
            const double t = gen.uniform(0, kPi);
            CHECK(f(t) == doctest::Approx(gain_coefficient_fd(E, t)).epsilon(1e-5).scale(1.0));
        }
    }
}

TEST_CASE("centered constants for the v,w ensemble against quadrature") {
    const Ensemble E = vw_ensemble();
    const PredictionReport r = predict(E);
    REQUIRE(r.cls.tag == AnomalyTag::Centered);
    CHECK(r.galerkin_order == 64);

    const double Z = integrate([&](double t) { return 1 / std::sqrt(D_of(E, t)); }, 0, kPi);
    auto rho = [&](double t) { return 1 / (Z * std::sqrt(D_of(E, t))); };
    auto f = [&](double t) { return gain_coefficient_fd(E, t); };
    const double Cs = integrate([&](double t) { return rho(t) * f(t); }, 0, kPi);
    CHECK(Cs == doctest::Approx(0.4569465810444638).epsilon(1e-6));
    CHECK(r.gamma_leading == doctest::Approx(Cs).epsilon(1e-7));

    // Poisson solution from the first-order form (sqrt(D) F')' = (f - Cs) / sqrt(D),
    // valid because b = D'/2 when Q = 0.
    const int n = 256;
    const double dt = kPi / n;
    auto g = [&](double t) { return (f(t) - Cs) / std::sqrt(D_of(E, t)); };
    std::vector<double> G(n + 1, 0.0);
    for (int i = 0; i < n; ++i) G[i + 1] = G[i] + integrate(g, i * dt, (i + 1) * dt, 0);
    CHECK(std::abs(G[n]) <= 1e-8);
    auto G_at = [&](double t) {
        const int i = std::min(n - 1, static_cast<int>(t / dt));
        return G[i] + integrate(g, i * dt, t, 0);
    };
    double num = 0, den = 0;
    for (int i = 0; i < n; ++i) {
        const double t = i * dt;
        num += G[i] / std::sqrt(D_of(E, t));
        den += 1 / std::sqrt(D_of(E, t));
    }
    const double k = -num / den;
    auto dF = [&](double t) { return (G_at(t) + k) / std::sqrt(D_of(E, t)); };
    std::vector<double> F(n, 0.0);
    for (int i = 0; i + 1 < n; ++i) F[i + 1] = F[i] + integrate(dF, i * dt, (i + 1) * dt, 0);

    double diffusive = 0, covariance = 0;
    for (int i = 0; i < n; ++i) {
        const double t = i * dt;
        const double eh2 = weighted(E, [&](const Atom& a) { return h_of(a.P, t) * h_of(a.P, t); });
        const double ehp = weighted(E, [&](const Atom& a) { return h_of(a.P, t) * p_of(a.P, t); });
        diffusive += rho(t) * (eh2 - 2 * ehp * dF(t)) * dt;
        covariance += -2 * rho(t) * (f(t) - Cs) * F[i] * dt;
    }
    CHECK(r.sigma_without_covariance.value() == doctest::Approx(diffusive).epsilon(1e-6));
    CHECK(r.sigma_leading.value() == doctest::Approx(diffusive + covariance).epsilon(1e-6));
    CHECK(r.sigma_leading.value() == doctest::Approx(0.478513340697).epsilon(1e-6));
    // the covariance term is far from negligible
    CHECK(std::abs(r.sigma_leading.value() - r.gamma_leading) > 10 * 1e-6);
}

TEST_CASE("property: centered prediction is rotation invariant") {
    Gen gen(68);
    for (int i = 0; i < 10; ++i) {
        const Ensemble E = random_nondegenerate_centered(gen);
        const double phi = gen.uniform(0, kPi);
        const Mat2 R{std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi)};
        const Ensemble C = conjugate_ensemble(BasisChange(R, BasisChange::Kind::Custom), E);
        const PredictionReport a = predict(E), b = predict(C);
        CHECK(b.gamma_leading == doctest::Approx(a.gamma_leading).epsilon(1e-9));
        CHECK(b.sigma_leading.value() == doctest::Approx(a.sigma_leading.value()).epsilon(1e-8));
    }
}

TEST_CASE("elliptic correlation prediction") {
    const FourierSeries f = FourierSeries::cos_mode(1);
    for (double t0 : {kPi / 8, kPi / 4, 3 * kPi / 8}) {
        CHECK(elliptic_correlation_prediction(f, Angle(t0), 0.1, 1.0) ==
              doctest::Approx(-5 * std::sin(2 * t0)).epsilon(1e-14));
        CHECK(elliptic_correlation_prediction(f, Angle(t0), 0.1, -2.0) ==
              doctest::Approx(2.5 * std::sin(2 * t0)).epsilon(1e-14));
    }
    // constant part drops out
    const FourierSeries g = FourierSeries::constant(3.0) + FourierSeries::sin_mode(2);
    CHECK(elliptic_correlation_prediction(g, Angle(0.3), 0.5, 1.0) == doctest::Approx(-(-std::cos(1.2) / 4) / 0.5));
    CHECK_THROWS_AS(elliptic_correlation_prediction(f, Angle(0), 0.0, 1.0), Error);
    CHECK_THROWS_AS(elliptic_correlation_prediction(f, Angle(0), 0.1, 0.0), Error);
}

TEST_CASE("relaxation rates") {
    CHECK(relaxation_rate(single({2, 0, 0}), 0.1) == doctest::Approx(0.4));
    CHECK(relaxation_rate(vw_ensemble(), 0.1) == doctest::Approx(4 * 0.01 * 0.5).epsilon(1e-6));
    CHECK(relaxation_rate(isotropic_ensemble(), 0.1) == doctest::Approx(4 * 0.01 * 0.5).epsilon(1e-9));
    // rotation plus a +-sin 2theta kick: E[p~^2] = <sin^2 2theta> = 1/2
    const Ensemble ell(std::vector<Atom>{{0.5, {1, -1, 1}, {}}, {0.5, {-1, -1, 1}, {}}});
    CHECK(relaxation_rate(ell, 0.1) == doctest::Approx(2 * 0.01 * 0.5).epsilon(1e-12));
    CHECK_THROWS_AS(relaxation_rate(single({0, 1, 0}), 0.1), Error);
}
