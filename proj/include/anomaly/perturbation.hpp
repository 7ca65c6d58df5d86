#pragma once

#include <optional>
#include <string>
#include <vector>

#include "anomaly/circle.hpp"
#include "anomaly/fourier.hpp"
#include "anomaly/sl2.hpp"

namespace anomaly {

enum class AnomalyTag { Elliptic, Hyperbolic, Centered, Parabolic };

const char* to_string(AnomalyTag tag);

struct AnomalyClass {
    AnomalyTag tag = AnomalyTag::Centered;
    /// sqrt|det E[P]|, zero for Centered.
    double eta = 0.0;
};

/// 1e-10 (1 + |E[P]|^2) with the Euclidean norm of (a, b, c).
double default_classify_tolerance(const Ensemble& E);

AnomalyClass classify(const Ensemble& E, double tol);
AnomalyClass classify(const Ensemble& E);

struct NormalForm {
    BasisChange basis;
    Ensemble ensemble;
};

/// M with det 1 and positive (1,1) entry such that M E[P] M^{-1} = s eta J,
/// J = ((0, -1), (1, 0)), s the sign of the (2,1) entry of E[P].
NormalForm elliptic_normal_form(const Ensemble& E);

/// M with det 1 and positive (1,1) entry such that M E[P] M^{-1} = diag(eta, -eta).
NormalForm hyperbolic_normal_form(const Ensemble& E);

struct PredictionReport {
    AnomalyClass cls;
    double gamma_leading = 0.0;
    double gamma_exponent = 2.0;
    /// Unset when sigma is only known as an upper bound.
    std::optional<double> sigma_leading;
    double sigma_exponent = 2.0;
    BasisChange normal_form;
    /// Degeneracy and hypothesis warnings; empty when all hypotheses hold.
    std::vector<std::string> flags;

    // Centered case only.
    int galerkin_order = 0;
    /// <rho | E[h^2] - 2 E[h p] F'>, i.e. sigma without the f-F covariance term.
    std::optional<double> sigma_without_covariance;
};

/// Coefficients of the centered diffusion generator L = D d^2 + b d:
/// D = E[p^2] / 2, b = E[q + p p' / 2].
struct DiffusionGenerator {
    FourierSeries D;
    FourierSeries b;
};

/// Throws NumericalError when min D <= 0 (checked on a fine grid).
DiffusionGenerator assemble_generator(const Ensemble& E);

/// L u = D u'' + b u' and L* rho = (D rho)'' - (b rho)', both exact.
FourierSeries apply_generator(const DiffusionGenerator& L, const FourierSeries& u);
FourierSeries apply_adjoint(const DiffusionGenerator& L, const FourierSeries& rho);

/// Fourier-Galerkin solve of L* rho = 0, int rho = 1, modes |k| <= K.
/// Throws NumericalError("... increase K") when the residual on a grid
/// exceeds 1e-8, rho dips below -1e-9 or the normalization is off by 1e-10.
FourierSeries solve_stationary_density(const DiffusionGenerator& L, int K);

/// L F = f - <rho|f> with c_0(F) = 0, at the order of rho.
/// Throws NumericalError("... increase K") when the residual exceeds 1e-8.
FourierSeries solve_poisson(const DiffusionGenerator& L, const FourierSeries& rho, const FourierSeries& f);

/// Coefficient of lambda^2 in E[g_n | theta] for a centered ensemble.
FourierSeries centered_gain_series(const Ensemble& E);

PredictionReport predict_elliptic(const Ensemble& E);
PredictionReport predict_hyperbolic(const Ensemble& E);
/// Galerkin order starts at K and doubles on failure up to 512.
PredictionReport predict_centered(const Ensemble& E, int K = 64);
/// Dispatches on classify(E); throws Error for Parabolic.
PredictionReport predict(const Ensemble& E, int K = 64);

/// Leading elliptic correlation sum -(F(theta0) - nu(F)) / (lambda eta)
/// with F' = f - <f>, nu taken uniform and c_0(F) = 0. eta is the signed
/// rotation speed, i.e. the (2,1) entry of E[P] in elliptic normal form.
double elliptic_correlation_prediction(const FourierSeries& f, Angle theta0, double lambda, double eta);

/// Decay rate per step of the slowest relevant angular mode:
/// elliptic 2 lambda^2 <E[p~^2]>, centered 4 lambda^2 min D,
/// hyperbolic 2 lambda eta. Parabolic throws.
double relaxation_rate(const Ensemble& E, double lambda);

}  // namespace anomaly
