#include "anomaly/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "anomaly/rng.hpp"

namespace anomaly {

namespace {

/// Neumaier compensated sum.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Runs job(r) for r in [0, count) on up to `threads` workers. Each index is
/// executed exactly once; results must be written to slot r by the job.
template <class Job>
void for_each_replica(std::uint64_t count, unsigned threads, Job&& job) {
    const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(std::max(1u, threads), count));
    if (workers <= 1) {
        for (std::uint64_t r = 0; r < count; ++r) job(r);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::uint64_t r = next++; r < count; r = next++) {
                try {
                    job(r);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& xs) {
    MeanSd out;
    if (xs.empty()) return out;
    CompensatedSum s;
    for (double x : xs) s.add(x);
    out.mean = s.value() / static_cast<double>(xs.size());
    if (xs.size() < 2) return out;
    CompensatedSum ss;
    for (double x : xs) ss.add((x - out.mean) * (x - out.mean));
    out.sd = std::sqrt(ss.value() / static_cast<double>(xs.size() - 1));
    return out;
}

Estimate replica_estimate(const std::vector<double>& per_replica, std::uint64_t n_effective) {
    const MeanSd ms = mean_sd(per_replica);
    return {ms.mean, ms.sd / std::sqrt(static_cast<double>(per_replica.size())), n_effective};
}

inline double fold_angle(double x, double y) {
    double t = std::atan2(y, x);
    if (t < 0) t += kPi;
    if (t >= kPi) t = 0.0;
    return t;
}

/// One step of the exact projective map on a unit representative (x, y).
/// Returns the gain (1/2) log |T e|^2.
inline double advance(const Unimodular2x2& T, double& x, double& y) {
    const double nx = T.t11() * x + T.t12() * y;
    const double ny = T.t21() * x + T.t22() * y;
    const double n2 = nx * nx + ny * ny;
    const double inv = 1.0 / std::sqrt(n2);
    x = nx * inv;
    y = ny * inv;
    return 0.5 * std::log(n2);
}

inline const Unimodular2x2& draw(const TransferLaw& law, ReplicaStream& rng) {
    const double u = rng.uniform();
    const auto it = std::upper_bound(law.cumulative.begin(), law.cumulative.end(), u);
    return law.matrices[static_cast<std::size_t>(it - law.cumulative.begin())];
}

constexpr std::uint64_t kShortRunSalt = 0xC0A2E1A7105EED5ULL;

}  // namespace

void ChainConfig::validate() const {
    if (!(lambda > 0)) throw Error("chain config: lambda must be > 0");
    if (!(steps > burn_in)) throw Error("chain config: steps must exceed burn_in");
    if (replicas < 1) throw Error("chain config: replicas must be >= 1");
}

double Histogram::expectation(const std::function<double(double)>& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i) acc += masses[i] * f(bin_center(i));
    return acc;
}

TestFunction named_test_function(const std::string& name) {
    if (name == "cos2") return {name, [](double t) { return std::cos(2 * t); }};
    if (name == "sin2") return {name, [](double t) { return std::sin(2 * t); }};
    if (name == "cos4") return {name, [](double t) { return std::cos(4 * t); }};
    if (name == "sin4") return {name, [](double t) { return std::sin(4 * t); }};
    if (name == "sin2sq") return {name, [](double t) { return std::sin(2 * t) * std::sin(2 * t); }};
    throw Error("unknown test function '" + name + "' (expected cos2, sin2, cos4, sin4, sin2sq)");
}

FourierSeries named_test_series(const std::string& name) {
    if (name == "cos2") return FourierSeries::cos_mode(1);
    if (name == "sin2") return FourierSeries::sin_mode(1);
    if (name == "cos4") return FourierSeries::cos_mode(2);
    if (name == "sin4") return FourierSeries::sin_mode(2);
    if (name == "sin2sq") return FourierSeries::constant(0.5) + FourierSeries::cos_mode(2, -0.5);
    throw Error("unknown test function '" + name + "' (expected cos2, sin2, cos4, sin4, sin2sq)");
}

TransferLaw TransferLaw::from_ensemble(const Ensemble& E, double lambda) {
    TransferLaw law;
    law.cumulative.assign(E.cumulative().begin(), E.cumulative().end());
    for (const auto& atom : E.atoms()) law.matrices.push_back(build_transfer(lambda, atom.P, atom.Q));
    return law;
}

TransferLaw TransferLaw::from_matrices(std::vector<double> weights, std::vector<Unimodular2x2> matrices) {
    if (weights.size() != matrices.size()) throw Error("transfer law: weight/matrix count mismatch");
    // Reuse the Ensemble weight validation and cumulative pinning.
    std::vector<Atom> atoms;
    for (double w : weights) atoms.push_back({w, {}, {}});
    const Ensemble shape(std::move(atoms));
    TransferLaw law;
    law.cumulative.assign(shape.cumulative().begin(), shape.cumulative().end());
    law.matrices = std::move(matrices);
    return law;
}

std::vector<ReplicaSums> run_chain(const TransferLaw& law, const ChainConfig& cfg, const CollectorSpec& collectors) {
    cfg.validate();
    const bool need_angle = collectors.histogram_bins > 0 || !collectors.functions.empty() ||
                            collectors.outside_radius > 0.0;
    const double bin_scale = collectors.histogram_bins > 0 ? static_cast<double>(collectors.histogram_bins) / kPi : 0.0;

    std::vector<ReplicaSums> out(cfg.replicas);
    for_each_replica(cfg.replicas, cfg.threads, [&](std::uint64_t r) {
        ReplicaStream rng(cfg.master_seed, r);
        ReplicaSums sums;
        sums.histogram.assign(collectors.histogram_bins, 0);
        std::vector<CompensatedSum> fsums(collectors.functions.size());
        CompensatedSum gain, gain_sq;

        double x = std::cos(cfg.theta0.value());
        double y = std::sin(cfg.theta0.value());
        for (std::uint64_t n = 1; n <= cfg.burn_in; ++n) advance(draw(law, rng), x, y);
        for (std::uint64_t n = cfg.burn_in + 1; n <= cfg.steps; ++n) {
            if (need_angle) {
                const double theta = fold_angle(x, y);
                if (bin_scale > 0) {
                    const auto bin = std::min<std::size_t>(static_cast<std::size_t>(theta * bin_scale),
                                                           collectors.histogram_bins - 1);
                    ++sums.histogram[bin];
                }
                for (std::size_t j = 0; j < fsums.size(); ++j) fsums[j].add(collectors.functions[j].f(theta));
                if (collectors.outside_radius > 0.0 &&
                    Angle::distance(Angle(theta), collectors.outside_center) > collectors.outside_radius) {
                    ++sums.outside_count;
                }
            }
            const double g = advance(draw(law, rng), x, y);
            gain.add(g);
            gain_sq.add(g * g);
        }
        sums.samples = cfg.recorded_steps();
        sums.gain_sum = gain.value();
        sums.gain_sq_sum = gain_sq.value();
        for (const auto& s : fsums) sums.function_sums.push_back(s.value());
        out[r] = std::move(sums);
    });
    return out;
}

std::vector<ReplicaSums> run_chain(const Ensemble& E, const ChainConfig& cfg, const CollectorSpec& collectors) {
    cfg.validate();
    return run_chain(TransferLaw::from_ensemble(E, cfg.lambda), cfg, collectors);
}

ChainSummary summarize(const std::vector<ReplicaSums>& sums) {
    if (sums.empty()) throw Error("summarize: no replicas");
    const double T = static_cast<double>(sums.front().samples);
    std::vector<double> rates;
    rates.reserve(sums.size());
    for (const auto& s : sums) rates.push_back(s.gain_sum / T);
    const auto n_eff = static_cast<std::uint64_t>(sums.size()) * sums.front().samples;

    ChainSummary out;
    out.gamma = replica_estimate(rates, n_eff);

    const double M = static_cast<double>(sums.size());
    std::vector<double> clt;
    clt.reserve(sums.size());
    for (const auto& s : sums) clt.push_back((s.gain_sum - T * out.gamma.value) / std::sqrt(T));
    const MeanSd ms = mean_sd(clt);
    out.sigma.value = ms.sd * ms.sd;
    out.sigma.std_error = sums.size() > 1 ? out.sigma.value * std::sqrt(2.0 / (M - 1.0)) : 0.0;
    out.sigma.n_effective = sums.size();
    return out;
}

Estimate estimate_lyapunov(const Ensemble& E, const ChainConfig& cfg) { return summarize(run_chain(E, cfg)).gamma; }

Estimate estimate_variance(const Ensemble& E, const ChainConfig& cfg) { return summarize(run_chain(E, cfg)).sigma; }

Histogram pooled_histogram(const std::vector<ReplicaSums>& sums) {
    if (sums.empty() || sums.front().histogram.empty()) throw Error("pooled_histogram: no histogram collected");
    std::vector<std::uint64_t> counts(sums.front().histogram.size(), 0);
    std::uint64_t total = 0;
    for (const auto& s : sums) {
        for (std::size_t i = 0; i < counts.size(); ++i) {
            counts[i] += s.histogram[i];
            total += s.histogram[i];
        }
    }
    Histogram h;
    h.masses.reserve(counts.size());
    for (auto c : counts) h.masses.push_back(static_cast<double>(c) / static_cast<double>(total));
    return h;
}

Histogram estimate_invariant_histogram(const Ensemble& E, const ChainConfig& cfg, std::size_t bins) {
    if (bins < 8) throw Error("histogram needs at least 8 bins");
    CollectorSpec spec;
    spec.histogram_bins = bins;
    return pooled_histogram(run_chain(E, cfg, spec));
}

Estimate function_average(const std::vector<ReplicaSums>& sums, std::size_t j) {
    std::vector<double> means;
    means.reserve(sums.size());
    for (const auto& s : sums) means.push_back(s.function_sums.at(j) / static_cast<double>(s.samples));
    return replica_estimate(means, sums.size() * sums.front().samples);
}

Estimate birkhoff_sum(const Ensemble& E, const ChainConfig& cfg, const std::function<double(double)>& f) {
    CollectorSpec spec;
    spec.functions.push_back({"f", f});
    return function_average(run_chain(E, cfg, spec), 0);
}

Estimate outside_fraction(const std::vector<ReplicaSums>& sums) {
    std::vector<double> fractions;
    fractions.reserve(sums.size());
    for (const auto& s : sums) fractions.push_back(static_cast<double>(s.outside_count) / static_cast<double>(s.samples));
    return replica_estimate(fractions, sums.size() * sums.front().samples);
}

Estimate measure_mass_outside(const Ensemble& E, const ChainConfig& cfg, Angle center, double radius) {
    if (!(radius > 0)) throw Error("measure_mass_outside: radius must be > 0");
    cfg.validate();
    // no point of the circle of period pi is farther than pi/2 from center
    if (radius >= kPi / 2) return {0.0, 0.0, cfg.replicas * cfg.recorded_steps()};
    CollectorSpec spec;
    spec.outside_radius = radius;
    spec.outside_center = center;
    return outside_fraction(run_chain(E, cfg, spec));
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw Error("loglog_slope: need two or more paired points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0) || !(y[i] > 0)) throw NumericalError("loglog_slope: nonpositive value");
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    if (!(sxx > 0)) throw Error("loglog_slope: x values must differ");
    return sxy / sxx;
}

std::uint64_t horizon_for_rate(double rate, std::uint64_t steps) {
    const std::uint64_t cap = std::max<std::uint64_t>(1, steps / 10);
    if (!(rate > 0)) return cap;
    const double h = std::ceil(8.0 / rate);
    if (h >= static_cast<double>(cap)) return cap;
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(h));
}

CorrelationEstimate correlation_sum(const Ensemble& E, const CorrelationConfig& cfg,
                                    const std::function<double(double)>& f) {
    CollectorSpec spec;
    spec.functions.push_back({"f", f});
    const Estimate nu = function_average(run_chain(E, cfg.stationary, spec), 0);
    return correlation_sum(E, cfg, f, nu);
}

CorrelationEstimate correlation_sum(const Ensemble& E, const CorrelationConfig& cfg,
                                    const std::function<double(double)>& f, const Estimate& stationary_mean) {
    cfg.stationary.validate();
    if (cfg.replicas < 2) throw Error("correlation_sum needs at least 2 replicas");
    const std::uint64_t H =
        cfg.horizon > 0 ? cfg.horizon : horizon_for_rate(cfg.relaxation_rate, cfg.stationary.steps);
    const TransferLaw law = TransferLaw::from_ensemble(E, cfg.stationary.lambda);
    const std::uint64_t seed = mix64(cfg.stationary.master_seed ^ kShortRunSalt);

    std::vector<double> per_replica(cfg.replicas);
    for_each_replica(cfg.replicas, cfg.stationary.threads, [&](std::uint64_t r) {
        ReplicaStream rng(seed, r);
        double x = std::cos(cfg.theta0.value());
        double y = std::sin(cfg.theta0.value());
        CompensatedSum acc;
        for (std::uint64_t n = 1; n <= H; ++n) {
            advance(draw(law, rng), x, y);
            acc.add(f(fold_angle(x, y)));
        }
        per_replica[r] = acc.value() - static_cast<double>(H) * stationary_mean.value;
    });

    CorrelationEstimate out;
    out.horizon = H;
    out.stationary_mean = stationary_mean;
    out.J = replica_estimate(per_replica, cfg.replicas * H);
    const double nu_part = static_cast<double>(H) * stationary_mean.std_error;
    out.J.std_error = std::sqrt(out.J.std_error * out.J.std_error + nu_part * nu_part);
    return out;
}

}  // namespace anomaly
