#pragma once

#include <optional>
#include <string>
#include <vector>

#include "anomaly/perturbation.hpp"
#include "anomaly/sl2.hpp"

namespace anomaly {

/// Discrete law of a scalar (mass or potential value).
struct ScalarLaw {
    std::vector<double> weights;
    std::vector<double> values;

    double mean() const;
    double variance() const;
    double second_moment() const;
};

struct ModelSpec {
    enum class Kind { HarmonicChain, AndersonEdge, KronigPenney };
    enum class Side { Below, Above };

    Kind kind = Kind::HarmonicChain;
    /// Masses for the chain, potential values otherwise.
    ScalarLaw law;
    /// Anderson energy offset, E = 2 + w lambda.
    double w = 0.0;
    /// Kronig-Penney band index, E_l = (pi l)^2.
    int l = 1;
    Side side = Side::Below;
    /// omega, lambda or epsilon.
    double coupling = 0.1;

    /// Throws Error for invalid fields.
    void validate() const;
};

const char* to_string(ModelSpec::Kind kind);

struct ModelEnsemble {
    Ensemble ensemble;
    /// omega for the chain, lambda^{1/2} for Anderson, epsilon^{1/2} for Kronig-Penney.
    double effective_lambda = 0.0;
};

/// Truncated log(I + X) for X = sum_{j=1}^{order} mu^j X_j; X[j] holds X_j
/// and X[0] must be zero. Returns the generator coefficients G_0..G_order.
std::vector<Mat2> log_series(const std::vector<Mat2>& X, int order);

/// Reduced ensemble with P = G_1 and Q^(j) = G_{j+2}.
ModelEnsemble build_ensemble(const ModelSpec& spec);

struct ReferencePrediction {
    /// Constants refer to the effective coupling of build_ensemble.
    PredictionReport report;
    std::vector<std::string> warnings;
    /// Anderson below the band edge: the published constant, kept for comparison.
    std::optional<double> printed_constant;
};

ReferencePrediction reference_prediction(const ModelSpec& spec);

/// Unreduced transfer matrix for one mass or potential value.
/// Kronig-Penney throws.
Unimodular2x2 raw_transfer(const ModelSpec& spec, double value);

}  // namespace anomaly
