#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "anomaly/estimators.hpp"
#include "anomaly/models.hpp"
#include "anomaly/sl2.hpp"

namespace anomaly::cli {

struct ChainSection {
    std::uint64_t steps = 2'000'000;
    std::uint64_t burn_in = 10'000;
    std::uint64_t replicas = 200;
    std::uint64_t seed = 1;
    std::size_t bins = 256;
    double theta0 = 0.0;
};

struct CorrelateSection {
    std::vector<double> theta0{kPi / 8, kPi / 4, 3 * kPi / 8};
    std::uint64_t replicas = 2000;
    /// 0 picks the horizon from the relaxation rate.
    std::uint64_t horizon = 0;
};

struct MeasureSection {
    double center = 0.0;
    /// Radius = lambda^radius_exponent, lambda being the configured coupling.
    double radius_exponent = 0.25;
};

struct CompareSection {
    double gamma_rel_tol = 0.15;
    /// Defaults to 0.15 for elliptic and 0.25 for centered ensembles.
    std::optional<double> sigma_rel_tol;
    double slope_tol = 0.1;
    /// Hyperbolic: required sigma / gamma at the smallest lambda.
    double hyperbolic_sigma_ratio = 0.2;
};

struct ExperimentConfig {
    std::optional<Ensemble> ensemble;
    std::optional<ModelSpec> model;
    /// Strictly positive and descending. For models these are the model
    /// couplings (omega, lambda, epsilon); simulations use the effective one.
    std::vector<double> lambda_list;
    ChainSection chain;
    std::vector<std::string> test_functions{"cos2"};
    CorrelateSection correlate;
    MeasureSection measure;
    CompareSection compare;
    int galerkin_order = 64;
    bool svg = false;
};

/// Parses the JSON document; unknown keys, wrong types and invalid values
/// throw anomaly::Error with the offending path.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

}  // namespace anomaly::cli
