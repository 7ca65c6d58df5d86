#pragma once

#include <complex>
#include <span>
#include <vector>

namespace anomaly {

/// pi-periodic real function sum_{|k| <= K} c_k exp(2 i k theta), stored as
/// complex coefficients with c_{-k} = conj(c_k). Products, derivatives and
/// inner products are exact on the coefficient level.
class FourierSeries {
public:
    using complex = std::complex<double>;

    FourierSeries() : FourierSeries(0) {}
    explicit FourierSeries(int order);
    /// Coefficients ordered k = -K..K; size must be odd.
    explicit FourierSeries(std::vector<complex> coefficients);

    static FourierSeries constant(double value);
    /// cos(2 k theta) and sin(2 k theta).
    static FourierSeries cos_mode(int k, double amplitude = 1.0);
    static FourierSeries sin_mode(int k, double amplitude = 1.0);

    int order() const { return order_; }
    /// Zero for |k| > order().
    complex coeff(int k) const;
    void set_coeff(int k, complex value);
    std::span<const complex> coefficients() const { return coeffs_; }

    double operator()(double theta) const;
    /// Imaginary part of the reconstruction at theta (zero for exact data).
    double imag_at(double theta) const;

    FourierSeries derivative() const;
    /// Same function with order raised or lowered (dropping modes).
    FourierSeries resized(int order) const;

    FourierSeries operator+(const FourierSeries& o) const;
    FourierSeries operator-(const FourierSeries& o) const;
    FourierSeries operator*(const FourierSeries& o) const;
    FourierSeries& operator+=(const FourierSeries& o);
    friend FourierSeries operator*(double s, const FourierSeries& f);

    /// Integral over [0, pi).
    double integral() const;
    /// min / max over an equispaced grid of the given size on [0, pi).
    double grid_min(int points) const;
    double sup_norm(int points) const;
    /// Largest |imag| of the reconstruction on the grid.
    double imag_residual(int points) const;

private:
    int order_ = 0;
    std::vector<complex> coeffs_;
};

/// Integral over [0, pi) of f * g.
double inner(const FourierSeries& f, const FourierSeries& g);

}  // namespace anomaly
