#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "anomaly/estimators.hpp"
#include "anomaly/models.hpp"
#include "anomaly/perturbation.hpp"
#include "svg.hpp"

namespace anomaly::cli {

namespace {

using nlohmann::json;

struct Point {
    double lambda = 0.0;
    double effective = 0.0;
    Ensemble ensemble;
};

struct SimulationRow {
    double lambda = 0.0;
    double effective = 0.0;
    ChainSummary summary;
};

std::vector<Point> experiment_points(const ExperimentConfig& cfg) {
    std::vector<Point> out;
    for (double lambda : cfg.lambda_list) {
        if (cfg.model) {
            ModelSpec spec = *cfg.model;
            spec.coupling = lambda;
            ModelEnsemble me = build_ensemble(spec);
            out.push_back({lambda, me.effective_lambda, std::move(me.ensemble)});
        } else {
            out.push_back({lambda, lambda, *cfg.ensemble});
        }
    }
    return out;
}

const Ensemble& base_ensemble(const ExperimentConfig& cfg, const std::vector<Point>& points) {
    return cfg.model ? points.front().ensemble : *cfg.ensemble;
}

/// Coordinates in which angles are meaningful: normal form when there is one.
Ensemble working_ensemble(const Ensemble& E) {
    switch (classify(E).tag) {
        case AnomalyTag::Elliptic: return elliptic_normal_form(E).ensemble;
        case AnomalyTag::Hyperbolic: return hyperbolic_normal_form(E).ensemble;
        default: return E;
    }
}

ChainConfig chain_config(const ExperimentConfig& cfg, const RunOptions& opt, double effective) {
    ChainConfig c;
    c.lambda = effective;
    c.steps = cfg.chain.steps;
    c.burn_in = cfg.chain.burn_in;
    c.theta0 = Angle(cfg.chain.theta0);
    c.replicas = cfg.chain.replicas;
    c.master_seed = opt.seed.value_or(cfg.chain.seed);
    c.threads = opt.threads;
    return c;
}

std::filesystem::path output_path(const RunOptions& opt, const std::string& name) {
    std::filesystem::create_directories(opt.out_dir);
    return std::filesystem::path(opt.out_dir) / name;
}

void write_file(const RunOptions& opt, const std::string& name, const std::string& content) {
    const auto path = output_path(opt, name);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw Error("write failed for '" + path.string() + "'");
    std::cout << "wrote " << path.string() << "\n";
}

json matrix_json(const Mat2& m) {
    // + 0.0 turns -0 into 0
    return json::array({json::array({m.m11 + 0.0, m.m12 + 0.0}), json::array({m.m21 + 0.0, m.m22 + 0.0})});
}

json report_json(const PredictionReport& r) {
    json j;
    j["class"] = to_string(r.cls.tag);
    j["eta"] = r.cls.eta;
    j["gamma_leading"] = r.gamma_leading;
    j["gamma_exponent"] = r.gamma_exponent;
    j["sigma_leading"] = r.sigma_leading ? json(*r.sigma_leading) : json(nullptr);
    j["sigma_upper_bound_only"] = !r.sigma_leading.has_value();
    j["sigma_exponent"] = r.sigma_exponent;
    j["normal_form"] = {{"kind", to_string(r.normal_form.kind)}, {"M", matrix_json(r.normal_form.M)}};
    j["flags"] = r.flags;
    if (r.cls.tag == AnomalyTag::Centered) {
        j["galerkin_order"] = r.galerkin_order;
        j["sigma_without_covariance"] = r.sigma_without_covariance ? json(*r.sigma_without_covariance) : json(nullptr);
    }
    return j;
}

std::string csv_line(std::initializer_list<std::string> cells) {
    std::string line;
    bool first = true;
    for (const auto& c : cells) {
        if (!first) line += ',';
        line += c;
        first = false;
    }
    return line + "\n";
}

std::string u64(std::uint64_t v) { return std::to_string(v); }

std::vector<SimulationRow> simulate_rows(const ExperimentConfig& cfg, const RunOptions& opt,
                                         const std::vector<Point>& points) {
    std::vector<SimulationRow> rows;
    for (const auto& p : points) {
        const ChainConfig c = chain_config(cfg, opt, p.effective);
        rows.push_back({p.lambda, p.effective, summarize(run_chain(p.ensemble, c))});
    }
    return rows;
}

std::string simulate_csv(const ExperimentConfig& cfg, const RunOptions& opt, const std::vector<SimulationRow>& rows) {
    std::string out = "lambda,gamma_hat,gamma_stderr,sigma_hat,sigma_stderr,N,M,seed\n";
    for (const auto& r : rows) {
        out += csv_line({format_double(r.lambda), format_double(r.summary.gamma.value),
                         format_double(r.summary.gamma.std_error), format_double(r.summary.sigma.value),
                         format_double(r.summary.sigma.std_error), u64(cfg.chain.steps), u64(cfg.chain.replicas),
                         u64(opt.seed.value_or(cfg.chain.seed))});
    }
    return out;
}

int compare_with(const ExperimentConfig& cfg, const RunOptions& opt, const std::vector<Point>& points,
                 const std::vector<SimulationRow>& rows) {
    const PredictionReport pred = predict(base_ensemble(cfg, points), cfg.galerkin_order);
    const bool hyperbolic = pred.cls.tag == AnomalyTag::Hyperbolic;
    const double sigma_tol =
        cfg.compare.sigma_rel_tol.value_or(pred.cls.tag == AnomalyTag::Centered ? 0.25 : 0.15);

    bool all = true;
    std::string table = "lambda,effective_lambda,quantity,mc,mc_stderr,predicted,ratio,tolerance,pass\n";
    auto row = [&](const SimulationRow& r, const char* what, const Estimate& mc, double predicted, double rel) {
        const double tol = std::max(rel * std::abs(predicted), 3 * mc.std_error);
        const bool ok = std::abs(mc.value - predicted) <= tol;
        all = all && ok;
        table += csv_line({format_double(r.lambda), format_double(r.effective), what, format_double(mc.value),
                           format_double(mc.std_error), format_double(predicted), format_double(mc.value / predicted),
                           format_double(tol), ok ? "pass" : "fail"});
    };
    for (const auto& r : rows) {
        row(r, "gamma", r.summary.gamma, pred.gamma_leading * std::pow(r.effective, pred.gamma_exponent),
            cfg.compare.gamma_rel_tol);
        if (pred.sigma_leading) {
            row(r, "sigma", r.summary.sigma, *pred.sigma_leading * std::pow(r.effective, pred.sigma_exponent),
                sigma_tol);
        }
    }
    if (hyperbolic) {
        const auto& r = rows.back();
        const double ratio = r.summary.sigma.value / r.summary.gamma.value;
        const bool ok = ratio <= cfg.compare.hyperbolic_sigma_ratio;
        all = all && ok;
        table += csv_line({format_double(r.lambda), format_double(r.effective), "sigma_over_gamma",
                           format_double(ratio), "nan", "nan", "nan", format_double(cfg.compare.hyperbolic_sigma_ratio),
                           ok ? "pass" : "fail"});
    }

    std::string slopes = "quantity,slope,relation,expected,tolerance,pass\n";
    std::vector<double> x, g, s;
    for (const auto& r : rows) {
        x.push_back(r.effective);
        g.push_back(r.summary.gamma.value);
        s.push_back(r.summary.sigma.value);
    }
    auto slope_row = [&](const char* what, const std::vector<double>& y, double expected, bool lower_bound) {
        double slope = std::nan("");
        try {
            slope = loglog_slope(x, y);
        } catch (const NumericalError&) {
        }
        const bool ok = lower_bound ? slope >= expected - cfg.compare.slope_tol
                                    : std::abs(slope - expected) <= cfg.compare.slope_tol;
        all = all && ok;
        slopes += csv_line({what, format_double(slope), lower_bound ? "ge" : "eq", format_double(expected),
                            format_double(cfg.compare.slope_tol), ok ? "pass" : "fail"});
    };
    if (rows.size() >= 2) {
        slope_row("gamma", g, pred.gamma_exponent, false);
        slope_row("sigma", s, pred.sigma_exponent, hyperbolic);
    }

    write_file(opt, "compare.csv", table);
    write_file(opt, "slopes.csv", slopes);
    if (cfg.svg) {
        PlotSeries mc{"gamma (MC)", x, g, false}, sg{"sigma (MC)", x, s, false};
        PlotSeries pg{"gamma (predicted)", x, {}, true};
        for (double v : x) pg.y.push_back(pred.gamma_leading * std::pow(v, pred.gamma_exponent));
        std::vector<PlotSeries> series{mc, pg, sg};
        if (pred.sigma_leading) {
            PlotSeries ps{"sigma (predicted)", x, {}, true};
            for (double v : x) ps.y.push_back(*pred.sigma_leading * std::pow(v, pred.sigma_exponent));
            series.push_back(ps);
        }
        write_file(opt, "compare.svg", loglog_svg("Monte Carlo vs prediction", "effective lambda", "per step", series));
    }
    std::cout << (all ? "compare: all checks pass\n" : "compare: some checks fail\n");
    return all ? kOk : kAcceptance;
}

int measure_with(const ExperimentConfig& cfg, const RunOptions& opt, const std::vector<Point>& points) {
    std::string hist = "lambda,bin_center,mass\n";
    std::string outside = "lambda,center,radius,mass_outside,stderr,ratio_to_next\n";
    std::vector<Estimate> masses;
    std::vector<double> radii;
    for (const auto& p : points) {
        const Ensemble W = working_ensemble(p.ensemble);
        CollectorSpec spec;
        spec.histogram_bins = cfg.chain.bins;
        spec.outside_center = Angle(cfg.measure.center);
        spec.outside_radius = std::pow(p.lambda, cfg.measure.radius_exponent);
        const auto sums = run_chain(W, chain_config(cfg, opt, p.effective), spec);
        const Histogram h = pooled_histogram(sums);
        for (std::size_t i = 0; i < h.bin_count(); ++i) {
            hist += csv_line({format_double(p.lambda), format_double(h.bin_center(i)), format_double(h.masses[i])});
        }
        masses.push_back(spec.outside_radius >= kPi / 2 ? Estimate{} : outside_fraction(sums));
        radii.push_back(spec.outside_radius);
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double ratio = i + 1 < points.size() ? masses[i].value / masses[i + 1].value : std::nan("");
        outside += csv_line({format_double(points[i].lambda), format_double(cfg.measure.center), format_double(radii[i]),
                             format_double(masses[i].value), format_double(masses[i].std_error),
                             format_double(ratio)});
    }
    write_file(opt, "measure_histogram.csv", hist);
    write_file(opt, "measure_outside.csv", outside);
    return kOk;
}

int correlate_with(const ExperimentConfig& cfg, const RunOptions& opt, const std::vector<Point>& points) {
    std::string out = "lambda,theta0,f_name,J_hat,J_stderr,H,J_predicted\n";
    for (const auto& p : points) {
        const Ensemble W = working_ensemble(p.ensemble);
        const AnomalyClass cls = classify(W);
        const double speed = ensemble_moments(W).mean_P.c;
        CorrelationConfig cc;
        cc.stationary = chain_config(cfg, opt, p.effective);
        cc.replicas = cfg.correlate.replicas;
        cc.horizon = cfg.correlate.horizon;
        cc.relaxation_rate = relaxation_rate(W, p.effective);
        for (const auto& name : cfg.test_functions) {
            const TestFunction tf = named_test_function(name);
            CollectorSpec spec;
            spec.functions.push_back(tf);
            const Estimate nu = function_average(run_chain(W, cc.stationary, spec), 0);
            for (double t0 : cfg.correlate.theta0) {
                cc.theta0 = Angle(t0);
                const CorrelationEstimate J = correlation_sum(W, cc, tf.f, nu);
                const double predicted =
                    cls.tag == AnomalyTag::Elliptic
                        ? elliptic_correlation_prediction(named_test_series(name), cc.theta0, p.effective, speed)
                        : std::nan("");
                out += csv_line({format_double(p.lambda), format_double(t0), name, format_double(J.J.value),
                                 format_double(J.J.std_error), u64(J.horizon), format_double(predicted)});
            }
        }
    }
    write_file(opt, "correlate.csv", out);
    return kOk;
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int run_classify(const ExperimentConfig& cfg, const RunOptions& opt) {
    const auto points = experiment_points(cfg);
    const Ensemble& E = base_ensemble(cfg, points);
    const AnomalyClass cls = classify(E);
    json j;
    j["class"] = to_string(cls.tag);
    j["eta"] = cls.eta;
    BasisChange basis;
    if (cls.tag == AnomalyTag::Elliptic) basis = elliptic_normal_form(E).basis;
    if (cls.tag == AnomalyTag::Hyperbolic) basis = hyperbolic_normal_form(E).basis;
    j["normal_form"] = {{"kind", to_string(basis.kind)}, {"M", matrix_json(basis.M)}};
    write_file(opt, "classify.json", j.dump(2) + "\n");
    return kOk;
}

int run_predict(const ExperimentConfig& cfg, const RunOptions& opt) {
    const auto points = experiment_points(cfg);
    json j = report_json(predict(base_ensemble(cfg, points), cfg.galerkin_order));
    if (cfg.model) {
        ModelSpec spec = *cfg.model;
        const ReferencePrediction ref = reference_prediction(spec);
        j["model"] = to_string(spec.kind);
        j["reference"] = report_json(ref.report);
        j["warnings"] = ref.warnings;
        if (ref.printed_constant) j["printed_constant"] = *ref.printed_constant;
        for (const auto& w : ref.warnings) std::cerr << "warning: " << w << "\n";
    }
    write_file(opt, "predict.json", j.dump(2) + "\n");
    return kOk;
}

int run_simulate(const ExperimentConfig& cfg, const RunOptions& opt) {
    const auto points = experiment_points(cfg);
    write_file(opt, "simulate.csv", simulate_csv(cfg, opt, simulate_rows(cfg, opt, points)));
    return kOk;
}

int run_measure(const ExperimentConfig& cfg, const RunOptions& opt) {
    return measure_with(cfg, opt, experiment_points(cfg));
}

int run_correlate(const ExperimentConfig& cfg, const RunOptions& opt) {
    return correlate_with(cfg, opt, experiment_points(cfg));
}

int run_compare(const ExperimentConfig& cfg, const RunOptions& opt) {
    const auto points = experiment_points(cfg);
    return compare_with(cfg, opt, points, simulate_rows(cfg, opt, points));
}

int run_sweep(const ExperimentConfig& cfg, const RunOptions& opt) {
    const auto points = experiment_points(cfg);
    run_classify(cfg, opt);
    run_predict(cfg, opt);
    const auto rows = simulate_rows(cfg, opt, points);
    write_file(opt, "simulate.csv", simulate_csv(cfg, opt, rows));
    measure_with(cfg, opt, points);
    correlate_with(cfg, opt, points);
    return compare_with(cfg, opt, points, rows);
}

}  // namespace anomaly::cli
