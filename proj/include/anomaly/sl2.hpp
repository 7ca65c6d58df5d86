#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "anomaly/fourier.hpp"

namespace anomaly {

/// Base for all library errors. NumericalError marks solver or
/// hypothesis failures; everything else is a usage error.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

/// Element ((a, b), (c, -a)) of sl(2,R). The (2,2) entry is never stored.
struct TracelessGenerator {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    constexpr double det() const { return -a * a - b * c; }

    constexpr TracelessGenerator operator+(const TracelessGenerator& o) const {
        return {a + o.a, b + o.b, c + o.c};
    }
    constexpr TracelessGenerator operator-(const TracelessGenerator& o) const {
        return {a - o.a, b - o.b, c - o.c};
    }
    constexpr TracelessGenerator operator-() const { return {-a, -b, -c}; }
    constexpr TracelessGenerator& operator+=(const TracelessGenerator& o) {
        a += o.a;
        b += o.b;
        c += o.c;
        return *this;
    }
    friend constexpr TracelessGenerator operator*(double s, const TracelessGenerator& g) {
        return {s * g.a, s * g.b, s * g.c};
    }
    constexpr bool operator==(const TracelessGenerator&) const = default;

    /// Largest absolute entry.
    double max_abs() const;
};

/// General real 2x2 matrix, row major. Used for basis changes and for
/// polynomial bookkeeping where unimodularity is not guaranteed.
struct Mat2 {
    double m11 = 1.0, m12 = 0.0, m21 = 0.0, m22 = 1.0;

    constexpr double det() const { return m11 * m22 - m12 * m21; }
    constexpr double trace() const { return m11 + m22; }

    constexpr Mat2 operator*(const Mat2& o) const {
        return {m11 * o.m11 + m12 * o.m21, m11 * o.m12 + m12 * o.m22,
                m21 * o.m11 + m22 * o.m21, m21 * o.m12 + m22 * o.m22};
    }
    constexpr Mat2 operator+(const Mat2& o) const {
        return {m11 + o.m11, m12 + o.m12, m21 + o.m21, m22 + o.m22};
    }
    constexpr Mat2 operator-(const Mat2& o) const {
        return {m11 - o.m11, m12 - o.m12, m21 - o.m21, m22 - o.m22};
    }
    friend constexpr Mat2 operator*(double s, const Mat2& x) {
        return {s * x.m11, s * x.m12, s * x.m21, s * x.m22};
    }

    static constexpr Mat2 identity() { return {}; }
    static constexpr Mat2 zero() { return {0.0, 0.0, 0.0, 0.0}; }
    static constexpr Mat2 from(const TracelessGenerator& g) { return {g.a, g.b, g.c, -g.a}; }

    /// Throws Error when |det| <= 1e-12.
    Mat2 inverse() const;
    double max_abs() const;
    /// Traceless part ((a, b), (c, -a)) with a = (m11 - m22) / 2.
    TracelessGenerator traceless_part() const;
};

/// Element of SL(2,R). Every construction checks |det - 1| against
/// unimodular_tolerance().
class Unimodular2x2 {
public:
    Unimodular2x2() = default;
    Unimodular2x2(double t11, double t12, double t21, double t22);
    explicit Unimodular2x2(const Mat2& m) : Unimodular2x2(m.m11, m.m12, m.m21, m.m22) {}

    static Unimodular2x2 identity() { return {}; }

    double t11() const { return m_.m11; }
    double t12() const { return m_.m12; }
    double t21() const { return m_.m21; }
    double t22() const { return m_.m22; }
    const Mat2& matrix() const { return m_; }
    double det() const { return m_.det(); }

    Unimodular2x2 operator*(const Unimodular2x2& o) const { return Unimodular2x2(m_ * o.m_); }
    Unimodular2x2 inverse() const { return {m_.m22, -m_.m12, -m_.m21, m_.m11}; }

    /// Determinant tolerance for a matrix with the given largest entry.
    /// Rounding of the entries alone perturbs det by ~eps * |T|^2, so the
    /// absolute 1e-12 bound is scaled once entries exceed 1.
    static double unimodular_tolerance(double max_abs_entry);

private:
    Mat2 m_{};
};

/// Q(lambda) = sum_j lambda^j Q^(j), degree at most QPolynomial::kMaxDegree.
class QPolynomial {
public:
    static constexpr std::size_t kMaxDegree = 2;

    QPolynomial() = default;
    explicit QPolynomial(std::vector<TracelessGenerator> coefficients);
    static QPolynomial constant(const TracelessGenerator& q0) { return QPolynomial({q0}); }

    TracelessGenerator evaluate(double lambda) const;
    /// Q^(0); zero generator when the polynomial is empty.
    TracelessGenerator leading() const;
    std::span<const TracelessGenerator> coefficients() const { return coeffs_; }
    std::size_t degree() const { return coeffs_.empty() ? 0 : coeffs_.size() - 1; }

private:
    std::vector<TracelessGenerator> coeffs_;
};

struct Atom {
    double weight = 1.0;
    TracelessGenerator P;
    QPolynomial Q;
};

/// Finite-support law of (P, Q). Weights are validated (nonnegative, sum
/// to one within 1e-12) at construction and cumulative weights are cached
/// for sampling.
class Ensemble {
public:
    explicit Ensemble(std::vector<Atom> atoms);

    std::span<const Atom> atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    const Atom& operator[](std::size_t i) const { return atoms_[i]; }
    std::span<const double> cumulative() const { return cumulative_; }

    /// Index drawn from one uniform u in [0, 1): the first i with
    /// cumulative[i] > u. Zero-weight atoms are never returned.
    std::size_t index_for(double u) const;

private:
    std::vector<Atom> atoms_;
    std::vector<double> cumulative_;
};

/// Every expectation the predictors need. Functions of theta are exact trig
/// polynomials with modes |k| <= 2 in exp(2ik theta), where p is the
/// projective velocity of P, q that of Q^(0), and
/// h(theta) = p1 cos 2theta + (p2 + p3)/2 sin 2theta.
struct MomentTable {
    TracelessGenerator mean_P;
    double det_mean_P = 0.0;
    /// E[p_i p_j] of (p1, p2, p3) = (a, b, c), not centered.
    std::array<std::array<double, 3>, 3> second_moment{};
    std::array<std::array<double, 3>, 3> covariance{};
    TracelessGenerator mean_Q0;

    FourierSeries p_squared;     // E[p^2]
    FourierSeries h_squared;     // E[h^2]
    FourierSeries h_times_p;     // E[h p]
    FourierSeries drift_second;  // E[q + p p' / 2]
};

/// Fourier form of the projective velocity
/// p(theta) = -a sin 2theta - b sin^2 theta + c cos^2 theta.
FourierSeries velocity_series(const TracelessGenerator& G);
/// Fourier form of e_theta^T G e_theta = a cos 2theta + (b + c)/2 sin 2theta.
FourierSeries quadratic_form_series(const TracelessGenerator& G);

/// exp(lambda G) = cosh(lambda d) I + sinh(lambda d)/d G with d^2 = -det G.
Unimodular2x2 exponential(double lambda, const TracelessGenerator& G);

/// exp(lambda P + lambda^2 Q(lambda)); the generator is assembled first.
Unimodular2x2 build_transfer(double lambda, const TracelessGenerator& P, const QPolynomial& Q);

MomentTable ensemble_moments(const Ensemble& E);

/// Consumes exactly one uniform draw.
template <class Rng>
const Atom& sample_atom(const Ensemble& E, Rng& rng) {
    return E[E.index_for(rng.uniform())];
}

}  // namespace anomaly
