#include "anomaly/models.hpp"

#include <cmath>
#include <numbers>

namespace anomaly {

namespace {

double weighted_sum(const ScalarLaw& law, double (*f)(double)) {
    double acc = 0.0;
    for (std::size_t i = 0; i < law.values.size(); ++i) acc += law.weights[i] * f(law.values[i]);
    return acc;
}

/// Product of two truncated matrix polynomials, keeping degrees <= order.
std::vector<Mat2> multiply(const std::vector<Mat2>& x, const std::vector<Mat2>& y, int order) {
    std::vector<Mat2> out(static_cast<std::size_t>(order) + 1, Mat2::zero());
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < y.size() && i + j <= static_cast<std::size_t>(order); ++j)
            out[i + j] = out[i + j] + x[i] * y[j];
    return out;
}

double band_energy(const ModelSpec& spec) {
    const double x = std::numbers::pi * spec.l;
    return x * x;
}

/// Builds the ensemble from per-value generator coefficients of the reduced
/// transfer matrix I + sum_j mu^j X_j(value).
template <class Coefficients>
Ensemble ensemble_from_series(const ScalarLaw& law, int order, Coefficients&& coefficients) {
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < law.values.size(); ++i) {
        const std::vector<Mat2> G = log_series(coefficients(law.values[i]), order);
        std::vector<TracelessGenerator> q;
        for (int j = 2; j <= order; ++j) q.push_back(G[static_cast<std::size_t>(j)].traceless_part());
        atoms.push_back({law.weights[i], G[1].traceless_part(), QPolynomial(std::move(q))});
    }
    return Ensemble(std::move(atoms));
}

}  // namespace

double ScalarLaw::mean() const { return weighted_sum(*this, [](double x) { return x; }); }

double ScalarLaw::second_moment() const { return weighted_sum(*this, [](double x) { return x * x; }); }

double ScalarLaw::variance() const {
    const double m = mean();
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) acc += weights[i] * (values[i] - m) * (values[i] - m);
    return acc;
}

const char* to_string(ModelSpec::Kind kind) {
    switch (kind) {
        case ModelSpec::Kind::HarmonicChain: return "harmonic_chain";
        case ModelSpec::Kind::AndersonEdge: return "anderson_edge";
        case ModelSpec::Kind::KronigPenney: return "kronig_penney";
    }
    return "harmonic_chain";
}

void ModelSpec::validate() const {
    if (law.values.empty()) throw Error("model: empty value law");
    if (law.values.size() != law.weights.size()) throw Error("model: weights and values differ in length");
    for (double v : law.values) {
        if (!std::isfinite(v)) throw Error("model: values must be finite");
    }
    // reuses the Ensemble weight checks
    std::vector<Atom> probe;
    for (double wt : law.weights) probe.push_back({wt, {}, {}});
    (void)Ensemble(std::move(probe));
    if (!(coupling > 0) || !std::isfinite(coupling)) throw Error("model: coupling must be > 0");

    switch (kind) {
        case Kind::HarmonicChain:
            for (double m : law.values) {
                if (!(m >= 1e-6)) throw Error("model: masses must be bounded away from zero (>= 1e-6)");
            }
            break;
        case Kind::AndersonEdge:
            if (!std::isfinite(w) || w == 0.0) throw Error("model: Anderson offset w must be nonzero");
            if (std::abs(law.mean()) > 1e-12) throw Error("model: Anderson potential must be centered");
            break;
        case Kind::KronigPenney:
            if (l < 1) throw Error("model: Kronig-Penney band index l must be >= 1");
            if (!(law.mean() > 0)) throw Error("model: Kronig-Penney mean potential must be > 0");
            break;
    }
}

std::vector<Mat2> log_series(const std::vector<Mat2>& X, int order) {
    if (order < 1) throw Error("log_series: order must be >= 1");
    if (X.empty() || X[0].max_abs() != 0.0) throw Error("log_series: X must have zero constant term");
    std::vector<Mat2> out(static_cast<std::size_t>(order) + 1, Mat2::zero());
    std::vector<Mat2> power = X;
    power.resize(static_cast<std::size_t>(order) + 1, Mat2::zero());
    for (int n = 1; n <= order; ++n) {
        const double c = (n % 2 == 1 ? 1.0 : -1.0) / n;
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = out[j] + c * power[j];
        power = multiply(power, X, order);
    }
    return out;
}

ModelEnsemble build_ensemble(const ModelSpec& spec) {
    spec.validate();
    switch (spec.kind) {
        case ModelSpec::Kind::HarmonicChain: {
            const double root = std::sqrt(spec.law.mean());
            auto X = [root](double m) {
                return std::vector<Mat2>{Mat2::zero(), Mat2{0.0, -root, m / root, 0.0}, Mat2{-m, 0.0, 0.0, 0.0}};
            };
            return {ensemble_from_series(spec.law, 4, X), spec.coupling};
        }
        case ModelSpec::Kind::AndersonEdge: {
            const double w = spec.w;
            auto X = [w](double v) {
                return std::vector<Mat2>{Mat2::zero(), Mat2{0.0, 1.0, w - v, 0.0}, Mat2{w - v, 0.0, 0.0, 0.0}};
            };
            return {ensemble_from_series(spec.law, 4, X), std::sqrt(spec.coupling)};
        }
        case ModelSpec::Kind::KronigPenney: {
            const double E = band_energy(spec);
            const double vbar = spec.law.mean();
            const double eta = std::sqrt(vbar / (2 * E));
            const double kappa = 1.0 / (2 * std::sqrt(2 * vbar * E));
            const Mat2 shape{-1.0, 1.0, -1.0, 1.0};
            const Mat2 swap{0.0, 1.0, 1.0, 0.0};
            const Mat2 ones{1.0, 1.0, 1.0, 1.0};
            if (spec.side == ModelSpec::Side::Below) {
                // R_{-eta mu} = exp(mu eta ((0, 1), (-1, 0)))
                const Mat2 rot{0.0, eta, -eta, 0.0};
                const std::vector<Mat2> R{Mat2::identity(), rot, 0.5 * (rot * rot)};
                auto X = [&](double v) {
                    const double dv = v - vbar;
                    const std::vector<Mat2> inner{Mat2::identity(), kappa * dv * shape,
                                                  (-vbar / (4 * E) - dv / (2 * E)) * swap};
                    std::vector<Mat2> T = multiply(R, inner, 2);
                    T[0] = Mat2::zero();
                    return T;
                };
                return {ensemble_from_series(spec.law, 2, X), std::sqrt(spec.coupling)};
            }
            auto X = [&](double v) {
                const Mat2 first = Mat2{-eta, 0.0, 0.0, eta} + kappa * (v - vbar) * shape;
                return std::vector<Mat2>{Mat2::zero(), first, (v / (4 * E)) * ones};
            };
            return {ensemble_from_series(spec.law, 2, X), std::sqrt(spec.coupling)};
        }
    }
    throw Error("model: unknown kind");
}

ReferencePrediction reference_prediction(const ModelSpec& spec) {
    const ModelEnsemble me = build_ensemble(spec);
    ReferencePrediction out;
    PredictionReport& r = out.report;
    switch (spec.kind) {
        case ModelSpec::Kind::HarmonicChain: {
            const double ce = spec.law.variance() / (8 * spec.law.mean());
            r.cls = {AnomalyTag::Elliptic, std::sqrt(spec.law.mean())};
            r.gamma_leading = ce;
            r.gamma_exponent = 2;
            r.sigma_leading = ce;
            r.sigma_exponent = 2;
            r.normal_form = predict_elliptic(me.ensemble).normal_form;
            break;
        }
        case ModelSpec::Kind::AndersonEdge: {
            if (spec.w > 0) {
                r.cls = {AnomalyTag::Hyperbolic, std::sqrt(spec.w)};
                r.gamma_leading = std::sqrt(spec.w);
                r.gamma_exponent = 1;
                r.sigma_exponent = 1.5;
                r.normal_form = predict_hyperbolic(me.ensemble).normal_form;
            } else {
                r = predict_elliptic(me.ensemble);
                out.printed_constant = (spec.law.second_moment() - spec.w * spec.w) / (8 * spec.w);
                out.warnings.push_back(
                    "Anderson below the band edge: the printed constant (E[v^2] - w^2) / (8 w) disagrees with the "
                    "elliptic pipeline value E[v^2] / (8 |w|); the pipeline value is reported");
            }
            break;
        }
        case ModelSpec::Kind::KronigPenney: {
            const double E = band_energy(spec);
            const double vbar = spec.law.mean();
            const double eta = std::sqrt(vbar / (2 * E));
            if (spec.side == ModelSpec::Side::Below) {
                const double ce = spec.law.variance() / (16 * vbar * E);
                r.cls = {AnomalyTag::Elliptic, eta};
                r.gamma_leading = ce;
                r.gamma_exponent = 2;
                r.sigma_leading = ce;
                r.sigma_exponent = 2;
                r.normal_form = predict_elliptic(me.ensemble).normal_form;
            } else {
                r.cls = {AnomalyTag::Hyperbolic, eta};
                r.gamma_leading = eta;
                r.gamma_exponent = 1;
                r.sigma_exponent = 1.5;
                r.normal_form = predict_hyperbolic(me.ensemble).normal_form;
            }
            break;
        }
    }
    return out;
}

Unimodular2x2 raw_transfer(const ModelSpec& spec, double value) {
    switch (spec.kind) {
        case ModelSpec::Kind::HarmonicChain: {
            const double w2 = spec.coupling * spec.coupling;
            return {2.0 - w2 * value, -1.0, 1.0, 0.0};
        }
        case ModelSpec::Kind::AndersonEdge: {
            const double lambda = spec.coupling;
            return {2.0 + spec.w * lambda - lambda * value, -1.0, 1.0, 0.0};
        }
        case ModelSpec::Kind::KronigPenney: break;
    }
    throw Error("Kronig-Penney has no raw single-step transfer matrix");
}

}  // namespace anomaly
