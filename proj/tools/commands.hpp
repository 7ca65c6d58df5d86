#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "config.hpp"

namespace anomaly::cli {

enum ExitCode { kOk = 0, kUsage = 1, kNumerical = 2, kAcceptance = 3 };

struct RunOptions {
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
};

int run_classify(const ExperimentConfig& cfg, const RunOptions& opt);
int run_predict(const ExperimentConfig& cfg, const RunOptions& opt);
int run_simulate(const ExperimentConfig& cfg, const RunOptions& opt);
int run_measure(const ExperimentConfig& cfg, const RunOptions& opt);
int run_correlate(const ExperimentConfig& cfg, const RunOptions& opt);
int run_compare(const ExperimentConfig& cfg, const RunOptions& opt);
int run_sweep(const ExperimentConfig& cfg, const RunOptions& opt);

/// %.17g, with "nan" and "inf" spelled out.
std::string format_double(double v);

}  // namespace anomaly::cli
