#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace anomaly::cli {

namespace {

using nlohmann::json;

void check_keys(const json& node, const std::string& path, const std::set<std::string>& allowed) {
    if (!node.is_object()) throw Error("config: " + path + " must be an object");
    for (const auto& item : node.items()) {
        if (!allowed.count(item.key())) throw Error("config: unknown key '" + path + "." + item.key() + "'");
    }
}

double number(const json& node, const std::string& path) {
    if (!node.is_number()) throw Error("config: " + path + " must be a number");
    return node.get<double>();
}

std::uint64_t count(const json& node, const std::string& path) {
    if (!node.is_number_unsigned()) throw Error("config: " + path + " must be a nonnegative integer");
    return node.get<std::uint64_t>();
}

std::vector<double> numbers(const json& node, const std::string& path) {
    if (!node.is_array()) throw Error("config: " + path + " must be an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < node.size(); ++i) out.push_back(number(node[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

TracelessGenerator triple(const json& node, const std::string& path) {
    const auto v = numbers(node, path);
    if (v.size() != 3) throw Error("config: " + path + " must be a triple [a, b, c]");
    return {v[0], v[1], v[2]};
}

Ensemble parse_ensemble(const json& node) {
    check_keys(node, "ensemble", {"atoms"});
    if (!node.contains("atoms") || !node["atoms"].is_array() || node["atoms"].empty()) {
        throw Error("config: ensemble.atoms must be a nonempty array");
    }
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < node["atoms"].size(); ++i) {
        const std::string path = "ensemble.atoms[" + std::to_string(i) + "]";
        const json& a = node["atoms"][i];
        check_keys(a, path, {"weight", "P", "Q"});
        if (!a.contains("weight") || !a.contains("P")) throw Error("config: " + path + " needs weight and P");
        Atom atom;
        atom.weight = number(a["weight"], path + ".weight");
        atom.P = triple(a["P"], path + ".P");
        if (a.contains("Q")) {
            if (!a["Q"].is_array()) throw Error("config: " + path + ".Q must be an array of triples");
            std::vector<TracelessGenerator> q;
            for (std::size_t j = 0; j < a["Q"].size(); ++j) {
                q.push_back(triple(a["Q"][j], path + ".Q[" + std::to_string(j) + "]"));
            }
            atom.Q = QPolynomial(std::move(q));
        }
        atoms.push_back(std::move(atom));
    }
    return Ensemble(std::move(atoms));
}

ModelSpec parse_model(const json& node) {
    check_keys(node, "model", {"kind", "weights", "values", "w", "l", "side"});
    if (!node.contains("kind") || !node["kind"].is_string()) throw Error("config: model.kind must be a string");
    ModelSpec spec;
    const std::string kind = node["kind"].get<std::string>();
    if (kind == "harmonic_chain") {
        spec.kind = ModelSpec::Kind::HarmonicChain;
    } else if (kind == "anderson_edge") {
        spec.kind = ModelSpec::Kind::AndersonEdge;
    } else if (kind == "kronig_penney") {
        spec.kind = ModelSpec::Kind::KronigPenney;
    } else {
        throw Error("config: model.kind must be harmonic_chain, anderson_edge or kronig_penney");
    }
    if (!node.contains("values")) throw Error("config: model.values is required");
    spec.law.values = numbers(node["values"], "model.values");
    if (node.contains("weights")) {
        spec.law.weights = numbers(node["weights"], "model.weights");
    } else {
        spec.law.weights.assign(spec.law.values.size(), 1.0 / static_cast<double>(spec.law.values.size()));
    }
    if (node.contains("w")) spec.w = number(node["w"], "model.w");
    if (node.contains("l")) spec.l = static_cast<int>(count(node["l"], "model.l"));
    if (node.contains("side")) {
        const std::string side = node["side"].is_string() ? node["side"].get<std::string>() : "";
        if (side == "below") {
            spec.side = ModelSpec::Side::Below;
        } else if (side == "above") {
            spec.side = ModelSpec::Side::Above;
        } else {
            throw Error("config: model.side must be \"below\" or \"above\"");
        }
    }
    const bool has_w = node.contains("w");
    const bool has_kp = node.contains("l") || node.contains("side");
    if (spec.kind == ModelSpec::Kind::AndersonEdge && !has_w) throw Error("config: model.w is required for anderson_edge");
    if (spec.kind != ModelSpec::Kind::AndersonEdge && has_w) throw Error("config: model.w only applies to anderson_edge");
    if (spec.kind != ModelSpec::Kind::KronigPenney && has_kp) {
        throw Error("config: model.l and model.side only apply to kronig_penney");
    }
    return spec;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(std::string("config: invalid JSON: ") + e.what());
    }
    check_keys(root, "config",
               {"ensemble", "model", "lambda_list", "chain", "test_functions", "correlate", "measure", "compare",
                "galerkin_order", "svg"});

    ExperimentConfig cfg;
    if (root.contains("ensemble") == root.contains("model")) {
        throw Error("config: exactly one of 'ensemble' and 'model' is required");
    }
    if (root.contains("ensemble")) cfg.ensemble = parse_ensemble(root["ensemble"]);
    if (root.contains("model")) cfg.model = parse_model(root["model"]);

    if (!root.contains("lambda_list")) throw Error("config: lambda_list is required");
    cfg.lambda_list = numbers(root["lambda_list"], "lambda_list");
    if (cfg.lambda_list.empty()) throw Error("config: lambda_list must not be empty");
    for (std::size_t i = 0; i < cfg.lambda_list.size(); ++i) {
        if (!(cfg.lambda_list[i] > 0)) throw Error("config: lambda_list entries must be > 0");
        if (i > 0 && !(cfg.lambda_list[i] < cfg.lambda_list[i - 1])) {
            throw Error("config: lambda_list must be strictly descending");
        }
    }
    if (cfg.model) {
        cfg.model->coupling = cfg.lambda_list.front();
        cfg.model->validate();
    }

    if (root.contains("chain")) {
        const json& c = root["chain"];
        check_keys(c, "chain", {"steps", "burn_in", "replicas", "seed", "bins", "theta0"});
        if (c.contains("steps")) cfg.chain.steps = count(c["steps"], "chain.steps");
        if (c.contains("burn_in")) cfg.chain.burn_in = count(c["burn_in"], "chain.burn_in");
        if (c.contains("replicas")) cfg.chain.replicas = count(c["replicas"], "chain.replicas");
        if (c.contains("seed")) cfg.chain.seed = count(c["seed"], "chain.seed");
        if (c.contains("bins")) cfg.chain.bins = count(c["bins"], "chain.bins");
        if (c.contains("theta0")) cfg.chain.theta0 = number(c["theta0"], "chain.theta0");
    }
    if (!(cfg.chain.steps > cfg.chain.burn_in)) throw Error("config: chain.steps must exceed chain.burn_in");
    if (cfg.chain.replicas < 2) throw Error("config: chain.replicas must be >= 2");
    if (cfg.chain.bins < 8) throw Error("config: chain.bins must be >= 8");

    if (root.contains("test_functions")) {
        const json& t = root["test_functions"];
        if (!t.is_array()) throw Error("config: test_functions must be an array of names");
        cfg.test_functions.clear();
        for (const auto& name : t) {
            if (!name.is_string()) throw Error("config: test_functions entries must be strings");
            named_test_function(name.get<std::string>());
            cfg.test_functions.push_back(name.get<std::string>());
        }
    }

    if (root.contains("correlate")) {
        const json& c = root["correlate"];
        check_keys(c, "correlate", {"theta0", "replicas", "horizon"});
        if (c.contains("theta0")) cfg.correlate.theta0 = numbers(c["theta0"], "correlate.theta0");
        if (c.contains("replicas")) cfg.correlate.replicas = count(c["replicas"], "correlate.replicas");
        if (c.contains("horizon")) cfg.correlate.horizon = count(c["horizon"], "correlate.horizon");
        if (cfg.correlate.replicas < 2) throw Error("config: correlate.replicas must be >= 2");
    }

    if (root.contains("measure")) {
        const json& m = root["measure"];
        check_keys(m, "measure", {"center", "radius_exponent"});
        if (m.contains("center")) cfg.measure.center = number(m["center"], "measure.center");
        if (m.contains("radius_exponent")) {
            cfg.measure.radius_exponent = number(m["radius_exponent"], "measure.radius_exponent");
        }
    }

    if (root.contains("compare")) {
        const json& c = root["compare"];
        check_keys(c, "compare", {"gamma_rel_tol", "sigma_rel_tol", "slope_tol", "hyperbolic_sigma_ratio"});
        if (c.contains("gamma_rel_tol")) cfg.compare.gamma_rel_tol = number(c["gamma_rel_tol"], "compare.gamma_rel_tol");
        if (c.contains("sigma_rel_tol")) cfg.compare.sigma_rel_tol = number(c["sigma_rel_tol"], "compare.sigma_rel_tol");
        if (c.contains("slope_tol")) cfg.compare.slope_tol = number(c["slope_tol"], "compare.slope_tol");
        if (c.contains("hyperbolic_sigma_ratio")) {
            cfg.compare.hyperbolic_sigma_ratio = number(c["hyperbolic_sigma_ratio"], "compare.hyperbolic_sigma_ratio");
        }
    }

    if (root.contains("galerkin_order")) {
        cfg.galerkin_order = static_cast<int>(count(root["galerkin_order"], "galerkin_order"));
        if (cfg.galerkin_order < 16) throw Error("config: galerkin_order must be >= 16");
    }
    if (root.contains("svg")) {
        if (!root["svg"].is_boolean()) throw Error("config: svg must be true or false");
        cfg.svg = root["svg"].get<bool>();
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("config: cannot read '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

}  // namespace anomaly::cli
