#include "anomaly/circle.hpp"

#include <algorithm>
#include <cmath>

namespace anomaly {

Angle::Angle(double theta) {
    if (!std::isfinite(theta)) throw Error("angle must be finite");
    if (theta < -kPi || theta >= 2 * kPi) {
        theta = std::fmod(theta, kPi);
    }
    if (theta < 0) {
        theta += kPi;
    } else if (theta >= kPi) {
        theta -= kPi;
    }
    // -tiny + pi rounds to pi, which is the same direction as 0
    if (theta >= kPi) theta = 0.0;
    theta_ = theta;
}

double Angle::distance(Angle x, Angle y) {
    const double d = std::abs(x.value() - y.value());
    return std::min(d, kPi - d);
}

BasisChange::BasisChange(const Mat2& m, Kind k) : M(m), kind(k) {
    if (!(std::abs(m.det()) > 1e-12)) throw Error("singular basis change (|det| <= 1e-12)");
}

const char* to_string(BasisChange::Kind k) {
    switch (k) {
        case BasisChange::Kind::EllipticNormal: return "elliptic-normal";
        case BasisChange::Kind::HyperbolicNormal: return "hyperbolic-normal";
        case BasisChange::Kind::Custom: return "custom";
    }
    return "custom";
}

Angle angle_of_vector(double x, double y) {
    if (x == 0.0 && y == 0.0) throw Error("degenerate direction");
    return Angle(std::atan2(y, x));
}

Angle projective_act(const Unimodular2x2& T, Angle theta) {
    const double c = std::cos(theta.value());
    const double s = std::sin(theta.value());
    return angle_of_vector(T.t11() * c + T.t12() * s, T.t21() * c + T.t22() * s);
}

double log_norm_gain(const Unimodular2x2& T, Angle theta) {
    const double c = std::cos(theta.value());
    const double s = std::sin(theta.value());
    const double x = T.t11() * c + T.t12() * s;
    const double y = T.t21() * c + T.t22() * s;
    return 0.5 * std::log(x * x + y * y);
}

double p_function(const TracelessGenerator& G, Angle theta) {
    const double s = std::sin(theta.value());
    const double c = std::cos(theta.value());
    return -G.a * std::sin(2 * theta.value()) - G.b * s * s + G.c * c * c;
}

double p_derivative(const TracelessGenerator& G, Angle theta) {
    const double t = 2 * theta.value();
    return -2 * G.a * std::cos(t) - (G.b + G.c) * std::sin(t);
}

double drift_expansion(const Ensemble& E, double lambda, Angle theta) {
    double first = 0.0;
    double second = 0.0;
    for (const auto& atom : E.atoms()) {
        const double p = p_function(atom.P, theta);
        first += atom.weight * p;
        second += atom.weight * (p_function(atom.Q.leading(), theta) + 0.5 * p * p_derivative(atom.P, theta));
    }
    return lambda * first + lambda * lambda * second;
}

Angle zoom(double lambda, Angle theta_hat) {
    if (!(lambda > 0)) throw Error("zoom requires lambda > 0");
    // direction (cos, sin) -> (sqrt(lambda) cos, sin)
    return angle_of_vector(std::sqrt(lambda) * std::cos(theta_hat.value()), std::sin(theta_hat.value()));
}

Angle unzoom(double lambda, Angle theta) {
    if (!(lambda > 0)) throw Error("unzoom requires lambda > 0");
    return angle_of_vector(std::cos(theta.value()), std::sqrt(lambda) * std::sin(theta.value()));
}

TracelessGenerator conjugate(const Mat2& M, const TracelessGenerator& G) {
    return (M * Mat2::from(G) * M.inverse()).traceless_part();
}

Unimodular2x2 conjugate(const Mat2& M, const Unimodular2x2& T) {
    return Unimodular2x2(M * T.matrix() * M.inverse());
}

Ensemble conjugate_ensemble(const BasisChange& basis, const Ensemble& E) {
    std::vector<Atom> atoms;
    atoms.reserve(E.size());
    for (const auto& atom : E.atoms()) {
        std::vector<TracelessGenerator> q;
        for (const auto& coeff : atom.Q.coefficients()) q.push_back(conjugate(basis.M, coeff));
        atoms.push_back({atom.weight, conjugate(basis.M, atom.P), QPolynomial(std::move(q))});
    }
    return Ensemble(std::move(atoms));
}

}  // namespace anomaly
