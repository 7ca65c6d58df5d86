#pragma once

#include <numbers>

#include "anomaly/sl2.hpp"

namespace anomaly {

inline constexpr double kPi = std::numbers::pi;

/// Point of the projective circle [0, pi).
class Angle {
public:
    constexpr Angle() = default;
    /// Reduces theta mod pi. Values within one period of [0, pi) take a
    /// single conditional add/subtract; anything else goes through fmod.
    explicit Angle(double theta);

    constexpr double value() const { return theta_; }
    constexpr operator double() const { return theta_; }

    /// Distance on the circle of period pi.
    static double distance(Angle x, Angle y);

private:
    double theta_ = 0.0;
};

/// Basis change M in Gl(2,R) from raw to working coordinates,
/// T = M raw M^{-1}.
struct BasisChange {
    enum class Kind { EllipticNormal, HyperbolicNormal, Custom };

    Mat2 M = Mat2::identity();
    Kind kind = Kind::Custom;

    BasisChange() = default;
    /// Throws Error when |det M| <= 1e-12.
    BasisChange(const Mat2& m, Kind k);
};

const char* to_string(BasisChange::Kind k);

/// Throws Error("degenerate direction") for the zero vector.
Angle angle_of_vector(double x, double y);

Angle projective_act(const Unimodular2x2& T, Angle theta);

/// (1/2) log |T e_theta|^2.
double log_norm_gain(const Unimodular2x2& T, Angle theta);

/// -a sin 2theta - b sin^2 theta + c cos^2 theta.
double p_function(const TracelessGenerator& G, Angle theta);
/// d/dtheta of p_function.
double p_derivative(const TracelessGenerator& G, Angle theta);

/// Mean displacement E[S(theta)] - theta to second order:
/// lambda E[p] + lambda^2 (E[q] + E[p p'] / 2), q taken from Q^(0).
double drift_expansion(const Ensemble& E, double lambda, Angle theta);

/// Circle diffeomorphism atan(lambda^{-1/2} tan theta), fixing 0 and pi/2,
/// and its inverse. Both throw Error for lambda <= 0.
Angle zoom(double lambda, Angle theta_hat);
Angle unzoom(double lambda, Angle theta);

TracelessGenerator conjugate(const Mat2& M, const TracelessGenerator& G);
Unimodular2x2 conjugate(const Mat2& M, const Unimodular2x2& T);
Ensemble conjugate_ensemble(const BasisChange& basis, const Ensemble& E);

}  // namespace anomaly
