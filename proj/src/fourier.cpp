#include "anomaly/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace anomaly {

namespace {

int checked_order(int order) {
    if (order < 0) throw std::invalid_argument("FourierSeries: negative order");
    return order;
}

}  // namespace

FourierSeries::FourierSeries(int order)
    : order_(checked_order(order)), coeffs_(2 * static_cast<std::size_t>(order_) + 1) {}

FourierSeries::FourierSeries(std::vector<complex> coefficients) : coeffs_(std::move(coefficients)) {
    if (coeffs_.size() % 2 == 0) throw std::invalid_argument("FourierSeries: even coefficient count");
    order_ = static_cast<int>(coeffs_.size() / 2);
}

FourierSeries FourierSeries::constant(double value) {
    FourierSeries f(0);
    f.coeffs_[0] = value;
    return f;
}

FourierSeries FourierSeries::cos_mode(int k, double amplitude) {
    if (k == 0) return constant(amplitude);
    FourierSeries f(std::abs(k));
    f.set_coeff(k, amplitude / 2);
    f.set_coeff(-k, amplitude / 2);
    return f;
}

FourierSeries FourierSeries::sin_mode(int k, double amplitude) {
    FourierSeries f(std::abs(k));
    if (k == 0) return f;
    // sin x = (e^{ix} - e^{-ix}) / (2i)
    f.set_coeff(k, complex(0.0, -amplitude / 2));
    f.set_coeff(-k, complex(0.0, amplitude / 2));
    return f;
}

FourierSeries::complex FourierSeries::coeff(int k) const {
    if (k < -order_ || k > order_) return {};
    return coeffs_[static_cast<std::size_t>(k + order_)];
}

void FourierSeries::set_coeff(int k, complex value) {
    if (k < -order_ || k > order_) throw std::out_of_range("FourierSeries::set_coeff");
    coeffs_[static_cast<std::size_t>(k + order_)] = value;
}

double FourierSeries::operator()(double theta) const {
    // Re sum_k c_k e^{2ik theta}
    double acc = coeff(0).real();
    for (int k = 1; k <= order_; ++k) {
        const complex e = std::polar(1.0, 2.0 * k * theta);
        acc += (coeff(k) * e + coeff(-k) * std::conj(e)).real();
    }
    return acc;
}

double FourierSeries::imag_at(double theta) const {
    double acc = coeff(0).imag();
    for (int k = 1; k <= order_; ++k) {
        const complex e = std::polar(1.0, 2.0 * k * theta);
        acc += (coeff(k) * e + coeff(-k) * std::conj(e)).imag();
    }
    return acc;
}

FourierSeries FourierSeries::derivative() const {
    FourierSeries d(order_);
    for (int k = -order_; k <= order_; ++k) d.set_coeff(k, complex(0.0, 2.0 * k) * coeff(k));
    return d;
}

FourierSeries FourierSeries::resized(int order) const {
    FourierSeries r(order);
    const int m = std::min(order, order_);
    for (int k = -m; k <= m; ++k) r.set_coeff(k, coeff(k));
    return r;
}

FourierSeries FourierSeries::operator+(const FourierSeries& o) const {
    FourierSeries r(std::max(order_, o.order_));
    for (int k = -r.order_; k <= r.order_; ++k) r.set_coeff(k, coeff(k) + o.coeff(k));
    return r;
}

FourierSeries FourierSeries::operator-(const FourierSeries& o) const { return *this + (-1.0) * o; }

FourierSeries& FourierSeries::operator+=(const FourierSeries& o) {
    *this = *this + o;
    return *this;
}

FourierSeries FourierSeries::operator*(const FourierSeries& o) const {
    FourierSeries r(order_ + o.order_);
    for (int i = -order_; i <= order_; ++i) {
        const complex ci = coeff(i);
        if (ci == complex{}) continue;
        for (int j = -o.order_; j <= o.order_; ++j) {
            r.coeffs_[static_cast<std::size_t>(i + j + r.order_)] += ci * o.coeff(j);
        }
    }
    return r;
}

FourierSeries operator*(double s, const FourierSeries& f) {
    FourierSeries r = f;
    for (auto& c : r.coeffs_) c *= s;
    return r;
}

double FourierSeries::integral() const { return std::numbers::pi * coeff(0).real(); }

double FourierSeries::grid_min(int points) const {
    double lo = (*this)(0.0);
    for (int i = 1; i < points; ++i) lo = std::min(lo, (*this)(std::numbers::pi * i / points));
    return lo;
}

double FourierSeries::sup_norm(int points) const {
    double hi = 0.0;
    for (int i = 0; i < points; ++i) hi = std::max(hi, std::abs((*this)(std::numbers::pi * i / points)));
    return hi;
}

double FourierSeries::imag_residual(int points) const {
    double hi = 0.0;
    for (int i = 0; i < points; ++i) hi = std::max(hi, std::abs(imag_at(std::numbers::pi * i / points)));
    return hi;
}

double inner(const FourierSeries& f, const FourierSeries& g) {
    // int_0^pi e^{2i(j+k)theta} dtheta = pi delta_{j,-k}
    const int m = std::min(f.order(), g.order());
    FourierSeries::complex acc{};
    for (int k = -m; k <= m; ++k) acc += f.coeff(k) * g.coeff(-k);
    return std::numbers::pi * acc.real();
}

}  // namespace anomaly
