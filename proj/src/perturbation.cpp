#include "anomaly/perturbation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>

namespace anomaly {

namespace {

using complex = std::complex<double>;

constexpr double kResidualTol = 1e-8;
constexpr double kNegativityTol = -1e-9;
constexpr double kNormalizationTol = 1e-10;
constexpr double kImagTol = 1e-10;
constexpr int kMaxGalerkinOrder = 512;

int check_grid(int order) { return std::max(64, 8 * order); }

void require(const Ensemble& E, AnomalyTag tag, const char* what) {
    if (classify(E).tag != tag) {
        throw Error(std::string(what) + " requires a " + to_string(tag) + " ensemble");
    }
}

/// Index of mode k in a (2K+1)-vector.
inline Eigen::Index slot(int k, int K) { return static_cast<Eigen::Index>(k + K); }

FourierSeries from_vector(const Eigen::VectorXcd& x, int K) {
    FourierSeries out(K);
    for (int k = -K; k <= K; ++k) {
        // symmetrize so that the reconstruction is exactly real
        const complex v = 0.5 * (x[slot(k, K)] + std::conj(x[slot(-k, K)]));
        out.set_coeff(k, v);
    }
    return out;
}

Ensemble centered_part(const Ensemble& E) {
    const TracelessGenerator mean = ensemble_moments(E).mean_P;
    std::vector<Atom> atoms;
    for (const auto& atom : E.atoms()) atoms.push_back({atom.weight, atom.P - mean, atom.Q});
    return Ensemble(std::move(atoms));
}

}  // namespace

const char* to_string(AnomalyTag tag) {
    switch (tag) {
        case AnomalyTag::Elliptic: return "elliptic";
        case AnomalyTag::Hyperbolic: return "hyperbolic";
        case AnomalyTag::Centered: return "centered";
        case AnomalyTag::Parabolic: return "parabolic";
    }
    return "parabolic";
}

double default_classify_tolerance(const Ensemble& E) {
    const TracelessGenerator m = ensemble_moments(E).mean_P;
    return 1e-10 * (1.0 + m.a * m.a + m.b * m.b + m.c * m.c);
}

AnomalyClass classify(const Ensemble& E, double tol) {
    if (!(tol > 0)) throw Error("classify: tol must be > 0");
    const TracelessGenerator m = ensemble_moments(E).mean_P;
    const double norm = std::sqrt(m.a * m.a + m.b * m.b + m.c * m.c);
    const double det = m.det();
    if (norm <= tol) return {AnomalyTag::Centered, 0.0};
    if (det > tol) return {AnomalyTag::Elliptic, std::sqrt(det)};
    if (det < -tol) return {AnomalyTag::Hyperbolic, std::sqrt(-det)};
    return {AnomalyTag::Parabolic, std::sqrt(std::abs(det))};
}

AnomalyClass classify(const Ensemble& E) { return classify(E, default_classify_tolerance(E)); }

NormalForm elliptic_normal_form(const Ensemble& E) {
    require(E, AnomalyTag::Elliptic, "elliptic_normal_form");
    const TracelessGenerator m = ensemble_moments(E).mean_P;
    const double eta = std::sqrt(m.det());
    const double s = m.c > 0 ? 1.0 : -1.0;
    const double alpha = std::sqrt(eta / std::abs(m.c));
    const Mat2 M{m.c * alpha / (s * eta), -m.a * alpha / (s * eta), 0.0, alpha};
    const BasisChange basis(M, BasisChange::Kind::EllipticNormal);
    Ensemble conj = conjugate_ensemble(basis, E);
    const TracelessGenerator target{0.0, -s * eta, s * eta};
    const TracelessGenerator got = ensemble_moments(conj).mean_P;
    if ((got - target).max_abs() > 1e-10 * std::max(1.0, eta)) {
        throw NumericalError("elliptic normal form residual exceeds 1e-10");
    }
    return {basis, std::move(conj)};
}

NormalForm hyperbolic_normal_form(const Ensemble& E) {
    require(E, AnomalyTag::Hyperbolic, "hyperbolic_normal_form");
    const TracelessGenerator m = ensemble_moments(E).mean_P;
    const double eta = std::sqrt(-m.det());

    auto pick = [](double x1, double y1, double x2, double y2) {
        return std::hypot(x1, y1) >= std::hypot(x2, y2) ? std::array<double, 2>{x1, y1}
                                                        : std::array<double, 2>{x2, y2};
    };
    auto u = pick(m.b, eta - m.a, eta + m.a, m.c);    // eigenvalue +eta
    auto v = pick(m.b, -eta - m.a, m.a - eta, m.c);   // eigenvalue -eta
    double det = u[0] * v[1] - u[1] * v[0];
    if (det < 0) {
        v[0] = -v[0];
        v[1] = -v[1];
        det = -det;
    }
    const double scale = 1.0 / std::sqrt(det);
    const Mat2 U{u[0] * scale, v[0] * scale, u[1] * scale, v[1] * scale};
    Mat2 M = U.inverse();
    if (M.m11 <= 0) M = -1.0 * M;
    const BasisChange basis(M, BasisChange::Kind::HyperbolicNormal);
    Ensemble conj = conjugate_ensemble(basis, E);
    const TracelessGenerator got = ensemble_moments(conj).mean_P;
    if ((got - TracelessGenerator{eta, 0.0, 0.0}).max_abs() > 1e-10 * std::max(1.0, eta)) {
        throw NumericalError("hyperbolic normal form residual exceeds 1e-10");
    }
    return {basis, std::move(conj)};
}

PredictionReport predict_elliptic(const Ensemble& E) {
    const NormalForm nf = elliptic_normal_form(E);
    const MomentTable mt = ensemble_moments(nf.ensemble);
    const auto& cov = mt.covariance;
    // Var(p1) and Var(p2 + p3) of the centered part
    const double var1 = cov[0][0];
    const double var23 = cov[1][1] + cov[2][2] + 2 * cov[1][2];
    const double ce = (4 * var1 + var23) / 8;

    PredictionReport r;
    r.cls = classify(E);
    r.gamma_leading = ce;
    r.gamma_exponent = 2;
    r.sigma_leading = ce;
    r.sigma_exponent = 2;
    r.normal_form = nf.basis;
    if (!(ce > 1e-14)) r.flags.push_back("degenerate: C_e vanishes, positivity hypothesis violated");
    return r;
}

PredictionReport predict_hyperbolic(const Ensemble& E) {
    const NormalForm nf = hyperbolic_normal_form(E);
    const MomentTable mt = ensemble_moments(nf.ensemble);

    PredictionReport r;
    r.cls = classify(E);
    r.gamma_leading = r.cls.eta;
    r.gamma_exponent = 1;
    r.sigma_leading.reset();
    r.sigma_exponent = 1.5;
    r.normal_form = nf.basis;
    if (!(mt.covariance[1][1] > 1e-14)) {
        r.flags.push_back("two-fixed-point hypothesis violated: Var(p2) = 0");
    }
    return r;
}

DiffusionGenerator assemble_generator(const Ensemble& E) {
    require(E, AnomalyTag::Centered, "assemble_generator");
    const MomentTable mt = ensemble_moments(E);
    DiffusionGenerator L{0.5 * mt.p_squared, mt.drift_second};
    if (!(L.D.grid_min(4096) > 0)) throw NumericalError("E[p^2] not strictly positive");
    return L;
}

FourierSeries apply_generator(const DiffusionGenerator& L, const FourierSeries& u) {
    const FourierSeries du = u.derivative();
    return L.D * du.derivative() + L.b * du;
}

FourierSeries apply_adjoint(const DiffusionGenerator& L, const FourierSeries& rho) {
    return (L.D * rho).derivative().derivative() - (L.b * rho).derivative();
}

FourierSeries solve_stationary_density(const DiffusionGenerator& L, int K) {
    if (K < 16) throw Error("solve_stationary_density: K must be >= 16");
    const Eigen::Index n = 2 * K + 1;
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(n, n);
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
    const int band = std::max(L.D.order(), L.b.order());
    for (int k = -K; k <= K; ++k) {
        if (k == 0) continue;
        for (int j = std::max(-K, k - band); j <= std::min(K, k + band); ++j) {
            A(slot(k, K), slot(j, K)) =
                -4.0 * k * k * L.D.coeff(k - j) - complex(0.0, 2.0 * k) * L.b.coeff(k - j);
        }
    }
    // int rho = pi c_0 = 1 replaces the identically zero k = 0 row
    A(slot(0, K), slot(0, K)) = std::numbers::pi;
    rhs[slot(0, K)] = 1.0;
    const Eigen::VectorXcd x = A.partialPivLu().solve(rhs);
    const FourierSeries rho = from_vector(x, K);

    const int grid = check_grid(K + band);
    if (!(rho.imag_residual(grid) <= kImagTol)) throw NumericalError("stationary density not real; increase K");
    if (!(apply_adjoint(L, rho).sup_norm(grid) <= kResidualTol)) {
        throw NumericalError("stationary density residual above 1e-8; increase K");
    }
    if (!(rho.grid_min(4 * K) >= kNegativityTol)) throw NumericalError("stationary density negative; increase K");
    if (!(std::abs(rho.integral() - 1.0) <= kNormalizationTol)) {
        throw NumericalError("stationary density normalization failed; increase K");
    }
    return rho;
}

FourierSeries solve_poisson(const DiffusionGenerator& L, const FourierSeries& rho, const FourierSeries& f) {
    const int K = rho.order();
    const FourierSeries g = f - FourierSeries::constant(inner(rho, f));
    const Eigen::Index n = 2 * K + 1;
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(n, n);
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
    const int band = std::max(L.D.order(), L.b.order());
    for (int k = -K; k <= K; ++k) {
        for (int j = std::max(-K, k - band); j <= std::min(K, k + band); ++j) {
            if (j == 0) continue;
            A(slot(k, K), slot(j, K)) =
                -4.0 * j * j * L.D.coeff(k - j) + complex(0.0, 2.0 * j) * L.b.coeff(k - j);
        }
        rhs[slot(k, K)] = g.coeff(k);
    }
    // c_0(F) = 0 frees column 0 for a slack in row 0; it vanishes when g is
    // orthogonal to rho
    A(slot(0, K), slot(0, K)) = 1.0;
    Eigen::VectorXcd x = A.partialPivLu().solve(rhs);
    x[slot(0, K)] = 0.0;
    const FourierSeries F = from_vector(x, K);

    const int grid = check_grid(K + band);
    if (!((apply_generator(L, F) - g).sup_norm(grid) <= kResidualTol)) {
        throw NumericalError("Poisson residual above 1e-8; increase K");
    }
    return F;
}

FourierSeries centered_gain_series(const Ensemble& E) {
    double c0 = 0, c2 = 0, s2 = 0, c4 = 0, s4 = 0;
    for (const auto& atom : E.atoms()) {
        const double w = atom.weight;
        const double p1 = atom.P.a, p2 = atom.P.b, p3 = atom.P.c;
        const TracelessGenerator q = atom.Q.leading();
        c0 += w * (4 * p1 * p1 + (p2 + p3) * (p2 + p3)) / 8;
        c2 += w * (q.a + 0.25 * (p3 * p3 - p2 * p2));
        s2 += w * 0.5 * (q.b + q.c + p1 * (p2 - p3));
        c4 += -w * (4 * p1 * p1 - (p2 + p3) * (p2 + p3)) / 8;
        s4 += -w * 0.5 * p1 * (p2 + p3);
    }
    return FourierSeries::constant(c0) + FourierSeries::cos_mode(1, c2) + FourierSeries::sin_mode(1, s2) +
           FourierSeries::cos_mode(2, c4) + FourierSeries::sin_mode(2, s4);
}

PredictionReport predict_centered(const Ensemble& E, int K) {
    const DiffusionGenerator L = assemble_generator(E);
    const MomentTable mt = ensemble_moments(E);
    const FourierSeries f = centered_gain_series(E);

    for (int order = K;; order *= 2) {
        try {
            const FourierSeries rho = solve_stationary_density(L, order);
            const FourierSeries F = solve_poisson(L, rho, f);
            const double cs = inner(rho, f);
            const double diffusive = inner(rho, mt.h_squared) - 2 * inner(rho, mt.h_times_p * F.derivative());
            const double covariance = -2 * inner(rho, (f - FourierSeries::constant(cs)) * F);

            PredictionReport r;
            r.cls = classify(E);
            r.gamma_leading = cs;
            r.gamma_exponent = 2;
            r.sigma_leading = diffusive + covariance;
            r.sigma_exponent = 2;
            r.galerkin_order = order;
            r.sigma_without_covariance = diffusive;
            if (!(cs > 1e-14)) r.flags.push_back("degenerate: C_s vanishes");
            return r;
        } catch (const NumericalError&) {
            if (order * 2 > kMaxGalerkinOrder) throw;
        }
    }
}

PredictionReport predict(const Ensemble& E, int K) {
    switch (classify(E).tag) {
        case AnomalyTag::Elliptic: return predict_elliptic(E);
        case AnomalyTag::Hyperbolic: return predict_hyperbolic(E);
        case AnomalyTag::Centered: return predict_centered(E, K);
        case AnomalyTag::Parabolic: break;
    }
    throw Error("parabolic anomaly not covered (non-generic)");
}

double elliptic_correlation_prediction(const FourierSeries& f, Angle theta0, double lambda, double eta) {
    if (!(lambda > 0) || eta == 0.0) throw Error("elliptic_correlation_prediction: needs lambda > 0 and eta != 0");
    FourierSeries F(f.order());
    for (int k = -f.order(); k <= f.order(); ++k) {
        if (k != 0) F.set_coeff(k, f.coeff(k) / complex(0.0, 2.0 * k));
    }
    return -F(theta0.value()) / (lambda * eta);
}

double relaxation_rate(const Ensemble& E, double lambda) {
    const AnomalyClass cls = classify(E);
    switch (cls.tag) {
        case AnomalyTag::Elliptic: {
            const Ensemble tilde = centered_part(elliptic_normal_form(E).ensemble);
            const double mean_p2 = ensemble_moments(tilde).p_squared.coeff(0).real();
            return 2 * lambda * lambda * mean_p2;
        }
        case AnomalyTag::Centered:
            return 4 * lambda * lambda * assemble_generator(E).D.grid_min(4096);
        case AnomalyTag::Hyperbolic:
            return 2 * lambda * cls.eta;
        case AnomalyTag::Parabolic: break;
    }
    throw Error("relaxation_rate: parabolic anomaly not covered");
}

}  // namespace anomaly
