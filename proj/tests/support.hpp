#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "anomaly/sl2.hpp"

namespace anomaly::testing {

/// Seeded generator for property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

    TracelessGenerator generator(double range) {
        return {uniform(-range, range), uniform(-range, range), uniform(-range, range)};
    }

    std::vector<double> weights(std::size_t n) {
        std::vector<double> w(n);
        double total = 0;
        for (auto& x : w) total += (x = uniform(0.05, 1.0));
        for (auto& x : w) x /= total;
        // absorb rounding so that the sum is exact to 1e-15
        double partial = 0;
        for (std::size_t i = 0; i + 1 < n; ++i) partial += w[i];
        w.back() = 1.0 - partial;
        return w;
    }

    Ensemble ensemble(std::size_t atoms, double range, bool with_q) {
        const auto w = weights(atoms);
        std::vector<Atom> out;
        for (std::size_t i = 0; i < atoms; ++i) {
            QPolynomial q;
            if (with_q) q = QPolynomial({generator(range), generator(range)});
            out.push_back({w[i], generator(range), q});
        }
        return Ensemble(std::move(out));
    }

    /// Ensemble with E[P] = 0 exactly: atoms come in +-P pairs of equal weight.
    Ensemble centered_ensemble(std::size_t pairs, double range) {
        const auto w = weights(pairs);
        std::vector<Atom> out;
        for (std::size_t i = 0; i < pairs; ++i) {
            const TracelessGenerator P = generator(range);
            const TracelessGenerator Q = generator(range);
            out.push_back({w[i] / 2, P, QPolynomial::constant(Q)});
            out.push_back({w[i] / 2, -P, QPolynomial::constant(Q)});
        }
        return Ensemble(std::move(out));
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

/// Scaling-and-squaring Taylor exponential of a general 2x2 matrix.
inline Mat2 taylor_exp(const Mat2& A) {
    int squarings = 0;
    double norm = A.max_abs();
    while (norm > 0.25) {
        norm /= 2;
        ++squarings;
    }
    const Mat2 B = std::ldexp(1.0, -squarings) * A;
    Mat2 sum = Mat2::identity();
    Mat2 term = Mat2::identity();
    for (int k = 1; k <= 30; ++k) {
        term = (1.0 / k) * (term * B);
        sum = sum + term;
    }
    for (int i = 0; i < squarings; ++i) sum = sum * sum;
    return sum;
}

inline double max_entry_diff(const Mat2& x, const Mat2& y) { return (x - y).max_abs(); }

}  // namespace anomaly::testing
