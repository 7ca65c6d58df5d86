#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "anomaly/circle.hpp"
#include "anomaly/sl2.hpp"

namespace anomaly {

struct ChainConfig {
    double lambda = 0.1;
    std::uint64_t steps = 2'000'000;
    std::uint64_t burn_in = 10'000;
    Angle theta0{};
    std::uint64_t replicas = 200;
    std::uint64_t master_seed = 1;
    /// Worker count. Never changes results.
    unsigned threads = 1;

    /// Throws Error unless steps > burn_in, replicas >= 1, lambda > 0.
    void validate() const;
    std::uint64_t recorded_steps() const { return steps - burn_in; }
};

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t n_effective = 0;
};

struct Histogram {
    std::vector<double> masses;  // uniform bins over [0, pi)

    std::size_t bin_count() const { return masses.size(); }
    double bin_width() const { return kPi / static_cast<double>(masses.size()); }
    double bin_center(std::size_t i) const { return (static_cast<double>(i) + 0.5) * bin_width(); }
    /// Histogram expectation of f, evaluated at bin centers.
    double expectation(const std::function<double(double)>& f) const;
};

struct TestFunction {
    std::string name;
    std::function<double(double)> f;
};

/// Named trig test functions: cos2, sin2, cos4, sin4, sin2sq (= sin^2 2theta).
TestFunction named_test_function(const std::string& name);
/// The same functions as exact Fourier series.
FourierSeries named_test_series(const std::string& name);

/// Discrete law over transfer matrices; the Monte Carlo driver's input.
/// Sampling consumes one uniform per step exactly like Ensemble.
struct TransferLaw {
    std::vector<double> cumulative;
    std::vector<Unimodular2x2> matrices;

    static TransferLaw from_ensemble(const Ensemble& E, double lambda);
    /// weights must satisfy the Ensemble weight invariant.
    static TransferLaw from_matrices(std::vector<double> weights, std::vector<Unimodular2x2> matrices);
};

struct CollectorSpec {
    std::size_t histogram_bins = 0;  // 0 disables the histogram
    std::vector<TestFunction> functions;
    /// When > 0, count samples with circle distance to outside_center larger
    /// than outside_radius.
    double outside_radius = 0.0;
    Angle outside_center{};
};

/// Raw sums of one replica over the recorded steps n > burn_in.
/// Gain sums are compensated (Neumaier); theta-dependent collectors see
/// the angle theta_{n-1} at which g_n is evaluated.
struct ReplicaSums {
    std::uint64_t samples = 0;
    double gain_sum = 0.0;
    double gain_sq_sum = 0.0;
    std::vector<std::uint64_t> histogram;
    std::vector<double> function_sums;
    std::uint64_t outside_count = 0;
};

std::vector<ReplicaSums> run_chain(const TransferLaw& law, const ChainConfig& cfg, const CollectorSpec& collectors = {});
std::vector<ReplicaSums> run_chain(const Ensemble& E, const ChainConfig& cfg, const CollectorSpec& collectors = {});

struct ChainSummary {
    Estimate gamma;
    Estimate sigma;
};

/// gamma: replica mean of per-step gain averages, stderr = sd / sqrt(M).
/// sigma: sample variance of (L_r - T gamma) / sqrt(T), stderr = sigma sqrt(2 / (M - 1)).
ChainSummary summarize(const std::vector<ReplicaSums>& sums);

Estimate estimate_lyapunov(const Ensemble& E, const ChainConfig& cfg);
Estimate estimate_variance(const Ensemble& E, const ChainConfig& cfg);
Histogram estimate_invariant_histogram(const Ensemble& E, const ChainConfig& cfg, std::size_t bins = 256);
Estimate birkhoff_sum(const Ensemble& E, const ChainConfig& cfg, const std::function<double(double)>& f);
Estimate measure_mass_outside(const Ensemble& E, const ChainConfig& cfg, Angle center, double radius);

/// Replica mean of column j of function_sums / samples.
Estimate function_average(const std::vector<ReplicaSums>& sums, std::size_t j);
Estimate outside_fraction(const std::vector<ReplicaSums>& sums);
Histogram pooled_histogram(const std::vector<ReplicaSums>& sums);

/// Least-squares slope of log y against log x. Needs >= 2 points, all positive.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct CorrelationConfig {
    /// Long run for the stationary mean nu(f); its theta0 is irrelevant.
    ChainConfig stationary;
    /// Start point and replica count of the short runs; the seed of the short
    /// runs is mix64(stationary.master_seed ^ 0xC0A2E1A7105EED5ULL).
    Angle theta0{};
    std::uint64_t replicas = 2000;
    /// Truncation H; 0 selects horizon_for_rate(relaxation_rate).
    std::uint64_t horizon = 0;
    double relaxation_rate = 0.0;
};

struct CorrelationEstimate {
    Estimate J;
    Estimate stationary_mean;
    std::uint64_t horizon = 0;
};

/// H = ceil(8 / rate) capped at steps / 10 (the cap alone when rate <= 0).
std::uint64_t horizon_for_rate(double rate, std::uint64_t steps);

/// sum_{n=1}^{H} (f(theta_n) - nu(f)) from the fixed start theta0, averaged
/// over replicas. The stderr combines the replica spread with H times the
/// stderr of nu(f).
CorrelationEstimate correlation_sum(const Ensemble& E, const CorrelationConfig& cfg,
                                    const std::function<double(double)>& f);
/// Same with a precomputed stationary mean (reused across start points).
CorrelationEstimate correlation_sum(const Ensemble& E, const CorrelationConfig& cfg,
                                    const std::function<double(double)>& f, const Estimate& stationary_mean);

}  // namespace anomaly
