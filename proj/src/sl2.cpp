#include "anomaly/sl2.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace anomaly {

double TracelessGenerator::max_abs() const {
    return std::max({std::abs(a), std::abs(b), std::abs(c)});
}

Mat2 Mat2::inverse() const {
    const double d = det();
    if (!(std::abs(d) > 1e-12)) throw Error("singular basis change (|det| <= 1e-12)");
    return {m22 / d, -m12 / d, -m21 / d, m11 / d};
}

double Mat2::max_abs() const {
    return std::max({std::abs(m11), std::abs(m12), std::abs(m21), std::abs(m22)});
}

TracelessGenerator Mat2::traceless_part() const { return {(m11 - m22) / 2, m12, m21}; }

double Unimodular2x2::unimodular_tolerance(double max_abs_entry) {
    return 1e-12 * std::max(1.0, max_abs_entry * max_abs_entry);
}

Unimodular2x2::Unimodular2x2(double t11, double t12, double t21, double t22) : m_{t11, t12, t21, t22} {
    const double err = std::abs(m_.det() - 1.0);
    if (!(err <= unimodular_tolerance(m_.max_abs()))) {
        throw NumericalError("matrix is not unimodular: |det - 1| = " + std::to_string(err));
    }
}

QPolynomial::QPolynomial(std::vector<TracelessGenerator> coefficients) : coeffs_(std::move(coefficients)) {
    if (coeffs_.size() > kMaxDegree + 1) {
        throw Error("Q polynomial degree " + std::to_string(coeffs_.size() - 1) + " exceeds maximum " +
                    std::to_string(kMaxDegree));
    }
}

TracelessGenerator QPolynomial::evaluate(double lambda) const {
    // Horner
    TracelessGenerator acc;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = lambda * acc + *it;
    return acc;
}

TracelessGenerator QPolynomial::leading() const { return coeffs_.empty() ? TracelessGenerator{} : coeffs_.front(); }

Ensemble::Ensemble(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw Error("ensemble needs at least one atom");
    double total = 0.0;
    for (const auto& atom : atoms_) {
        if (!(atom.weight >= 0.0)) throw Error("ensemble weights must be nonnegative");
        total += atom.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) throw Error("ensemble weights must sum to 1, got " + std::to_string(total));
    cumulative_.reserve(atoms_.size());
    double run = 0.0;
    for (const auto& atom : atoms_) {
        run += atom.weight;
        cumulative_.push_back(run);
    }
    // Pin the last positive-weight entry (and everything after it) to 1 so
    // that u in [0,1) always lands on an atom with positive weight.
    std::size_t last = atoms_.size() - 1;
    while (last > 0 && atoms_[last].weight == 0.0) --last;
    for (std::size_t i = last; i < cumulative_.size(); ++i) cumulative_[i] = 1.0;
}

std::size_t Ensemble::index_for(double u) const {
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return static_cast<std::size_t>(it - cumulative_.begin());
}

FourierSeries velocity_series(const TracelessGenerator& G) {
    // -a sin 2t + (c - b)/2 + (c + b)/2 cos 2t
    return FourierSeries::sin_mode(1, -G.a) + FourierSeries::constant((G.c - G.b) / 2) +
           FourierSeries::cos_mode(1, (G.c + G.b) / 2);
}

FourierSeries quadratic_form_series(const TracelessGenerator& G) {
    return FourierSeries::cos_mode(1, G.a) + FourierSeries::sin_mode(1, (G.b + G.c) / 2);
}

Unimodular2x2 exponential(double lambda, const TracelessGenerator& G) {
    // P^2 = -det(P) I, so exp(lambda P) = C I + S P with
    //   s = -det P > 0: C = cosh(lambda d), S = sinh(lambda d)/d, d = sqrt(s)
    //   s < 0:          C = cos(lambda w),  S = sin(lambda w)/w,  w = sqrt(-s)
    const double s = -G.det();
    const double x2 = lambda * lambda * s;  // signed (lambda d)^2
    double C, S;
    if (std::abs(x2) < 1e-8) {
        C = 1.0 + x2 / 2 * (1.0 + x2 / 12);
        S = lambda * (1.0 + x2 / 6 * (1.0 + x2 / 20));
    } else if (s > 0) {
        const double d = std::sqrt(s);
        C = std::cosh(lambda * d);
        S = std::sinh(lambda * d) / d;
    } else {
        const double w = std::sqrt(-s);
        C = std::cos(lambda * w);
        S = std::sin(lambda * w) / w;
    }
    return {C + S * G.a, S * G.b, S * G.c, C - S * G.a};
}

Unimodular2x2 build_transfer(double lambda, const TracelessGenerator& P, const QPolynomial& Q) {
    const TracelessGenerator generator = lambda * P + (lambda * lambda) * Q.evaluate(lambda);
    return exponential(1.0, generator);
}

MomentTable ensemble_moments(const Ensemble& E) {
    MomentTable m;
    m.p_squared = FourierSeries(2);
    m.h_squared = FourierSeries(2);
    m.h_times_p = FourierSeries(2);
    m.drift_second = FourierSeries(2);
    for (const auto& atom : E.atoms()) {
        const double w = atom.weight;
        const auto& P = atom.P;
        m.mean_P += w * P;
        m.mean_Q0 += w * atom.Q.leading();
        const std::array<double, 3> v{P.a, P.b, P.c};
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) m.second_moment[i][j] += w * v[i] * v[j];

        const FourierSeries p = velocity_series(P);
        const FourierSeries h = quadratic_form_series(P);
        const FourierSeries q = velocity_series(atom.Q.leading());
        m.p_squared += w * (p * p);
        m.h_squared += w * (h * h);
        m.h_times_p += w * (h * p);
        m.drift_second += w * (q + 0.5 * (p * p.derivative()));
    }
    m.det_mean_P = m.mean_P.det();
    const std::array<double, 3> mu{m.mean_P.a, m.mean_P.b, m.mean_P.c};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) m.covariance[i][j] = m.second_moment[i][j] - mu[i] * mu[j];
    return m;
}

}  // namespace anomaly
