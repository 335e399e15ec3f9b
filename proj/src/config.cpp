#include <cmath>
#include <fstream>
#include <sstream>

#include "fpbandits/errors.hpp"
#include "fpbandits/harness.hpp"
#include "json.hpp"

namespace fpbandits {

namespace {

using nlohmann::json;

LinkKind parse_link_kind(const std::string& s) {
    if (s == "linear") return LinkKind::Linear;
    if (s == "logistic") return LinkKind::Logistic;
    if (s == "poisson") return LinkKind::Poisson;
    throw ConfigError("unknown link: " + s);
}

std::string link_kind_name(LinkKind kind) {
    switch (kind) {
        case LinkKind::Linear: return "linear";
        case LinkKind::Logistic: return "logistic";
        case LinkKind::Poisson: return "poisson";
    }
    return "linear";
}

Algorithm parse_algorithm(const std::string& s) {
    if (s == "FP") return Algorithm::FP;
    if (s == "EpsGreedy") return Algorithm::EpsGreedy;
    if (s == "UCB") return Algorithm::UCB;
    if (s == "TS") return Algorithm::TS;
    if (s == "PHE") return Algorithm::PHE;
    if (s == "RandUCB") return Algorithm::RandUCB;
    throw ConfigError("unknown algorithm: " + s);
}

std::string algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::FP: return "FP";
        case Algorithm::EpsGreedy: return "EpsGreedy";
        case Algorithm::UCB: return "UCB";
        case Algorithm::TS: return "TS";
        case Algorithm::PHE: return "PHE";
        case Algorithm::RandUCB: return "RandUCB";
    }
    return "FP";
}

LinkSpec make_link(LinkKind kind, double derivative_floor, double sigma) {
    LinkSpec link;
    switch (kind) {
        case LinkKind::Linear: link = LinkSpec::linear(sigma); break;
        case LinkKind::Logistic: link = LinkSpec::logistic(derivative_floor); break;
        case LinkKind::Poisson: link = LinkSpec::poisson(); break;
    }
    return link;
}

// R_max = sup |mu| over the working range |z| <= S.
double reward_mag_bound_for(const LinkSpec& link, double theta_norm) {
    switch (link.kind) {
        case LinkKind::Linear: return theta_norm;
        case LinkKind::Logistic: return 1.0;
        case LinkKind::Poisson: return std::exp(theta_norm);
    }
    return 1.0;
}

EnvConfig parse_env(const json& j) {
    EnvConfig env;
    const std::string link = j.value("link", "linear");
    env.dim = j.value("d", 2);
    env.num_arms = j.value("K", 2);
    env.horizon = j.value("T", std::int64_t{1});
    env.theta_norm = j.value("S", 1.0);
    env.noise_sigma = j.value("noise_sigma", 1.0);
    env.unit_sphere_features = j.value("unit_sphere_features", false);
    const std::string mode = j.value("context_mode", "fresh");
    if (mode == "fresh") {
        env.context_mode = ContextMode::FreshEachRound;
    } else if (mode == "fixed") {
        env.context_mode = ContextMode::FixedArmSet;
    } else {
        throw ConfigError("unknown context_mode: " + mode);
    }
    env.link = make_link(parse_link_kind(link), j.value("derivative_floor", 0.0),
                         env.noise_sigma);
    return env;
}

PolicyConfig parse_policy(const json& j, const EnvConfig& env) {
    PolicyConfig p;
    p.algorithm = parse_algorithm(j.value("algorithm", "FP"));
    p.link = env.link;
    p.lambda = j.value("lambda", 1.0);
    const std::string mode = j.value("c_t_mode", "fixed");
    if (mode == "fixed") {
        p.c_t_mode = CtMode::Fixed;
    } else if (mode == "theory") {
        p.c_t_mode = CtMode::Theory;
    } else {
        throw ConfigError("unknown c_t_mode: " + mode);
    }
    p.c_t_value = j.value("c_t", 1.0);
    p.delta = j.value("delta", 1.0 / static_cast<double>(env.horizon));
    p.epsilon0 = j.value("epsilon", 0.05);
    p.phe_noise_scale = j.value("phe_noise_scale", 1.0);
    p.norm_bound = j.value("norm_bound", env.theta_norm);
    p.reward_mag_bound =
        j.value("reward_mag_bound", reward_mag_bound_for(env.link, env.theta_norm));

    const std::string dist = j.value("perturbation", "gaussian");
    const std::string coupling = j.value("coupling", "coupled");
    const Coupling c = coupling == "uncoupled" ? Coupling::Uncoupled : Coupling::Coupled;
    if (coupling != "coupled" && coupling != "uncoupled") {
        throw ConfigError("unknown coupling: " + coupling);
    }
    if (dist == "gaussian") {
        p.scheme = PerturbationScheme::gaussian(c);
    } else if (dist == "uniform_ball") {
        p.scheme = PerturbationScheme::uniform_ball(c);
    } else {
        throw ConfigError("unknown perturbation: " + dist);
    }
    return p;
}

ExperimentConfig parse_config(const json& j) {
    ExperimentConfig cfg;
    if (!j.contains("env")) throw ConfigError("config: missing \"env\" section");
    cfg.env = parse_env(j.at("env"));
    if (!j.contains("policies") || !j.at("policies").is_array() || j.at("policies").empty()) {
        throw ConfigError("config: missing or empty \"policies\" list");
    }
    for (const json& pj : j.at("policies")) {
        cfg.policies.push_back(parse_policy(pj, cfg.env));
    }
    cfg.n_runs = j.value("n_runs", 1);
    cfg.base_seed = j.value("base_seed", std::uint64_t{0});
    cfg.output_path = j.value("output", "");
    cfg.record_diagnostics = j.value("record_diagnostics", false);
    cfg.checkpoint_every = j.value("checkpoint_every", std::int64_t{0});
    cfg.threads = j.value("threads", 0);
    cfg.validate();
    return cfg;
}

json env_to_json(const EnvConfig& env) {
    json j;
    j["link"] = link_kind_name(env.link.kind);
    j["d"] = env.dim;
    j["K"] = env.num_arms;
    j["T"] = env.horizon;
    j["context_mode"] = env.context_mode == ContextMode::FreshEachRound ? "fresh" : "fixed";
    j["S"] = env.theta_norm;
    j["noise_sigma"] = env.noise_sigma;
    j["derivative_floor"] = env.link.derivative_floor;
    j["unit_sphere_features"] = env.unit_sphere_features;
    return j;
}

json policy_to_json(const PolicyConfig& p) {
    json j;
    j["algorithm"] = algorithm_name(p.algorithm);
    j["lambda"] = p.lambda;
    j["c_t_mode"] = p.c_t_mode == CtMode::Fixed ? "fixed" : "theory";
    j["c_t"] = p.c_t_value;
    j["delta"] = p.delta;
    j["epsilon"] = p.epsilon0;
    j["phe_noise_scale"] = p.phe_noise_scale;
    j["norm_bound"] = p.norm_bound;
    j["reward_mag_bound"] = p.reward_mag_bound;
    j["perturbation"] =
        p.scheme.distribution == PerturbDistribution::GaussianStd ? "gaussian" : "uniform_ball";
    j["coupling"] = p.scheme.coupling == Coupling::Coupled ? "coupled" : "uncoupled";
    return j;
}

// Flat "a.b.c = value" lines; '#' starts a comment. Values are parsed as
// JSON scalars, falling back to strings.
json flat_to_json(const std::string& text) {
    json root = json::object();
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos) {
                throw ConfigError("flat config line " + std::to_string(line_no) +
                                  ": expected key = value");
            }
            continue;
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("flat config line " + std::to_string(line_no) + ": empty key");
        }
        json parsed;
        try {
            parsed = json::parse(value);
        } catch (const json::parse_error&) {
            parsed = value;
        }

        json* node = &root;
        std::size_t start = 0;
        while (true) {
            const std::size_t dot = key.find('.', start);
            const std::string part = key.substr(start, dot - start);
            const bool last = dot == std::string::npos;
            const bool is_index = !part.empty() &&
                                  part.find_first_not_of("0123456789") == std::string::npos;
            if (is_index) {
                if (!node->is_array()) *node = json::array();
                const std::size_t idx = std::stoul(part);
                while (node->size() <= idx) node->push_back(json::object());
                node = &(*node)[idx];
            } else {
                if (!node->is_object()) *node = json::object();
                node = &(*node)[part];
            }
            if (last) break;
            start = dot + 1;
        }
        *node = parsed;
    }
    return root;
}

}  // namespace

ExperimentConfig parse_config_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();

    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
        return parse_config_json(text);
    }
    // Try JSON first, fall back to the flat key-value format.
    try {
        return parse_config_json(text);
    } catch (const ConfigError&) {
        return parse_config(flat_to_json(text));
    }
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["env"] = env_to_json(cfg.env);
    j["policies"] = json::array();
    for (const PolicyConfig& p : cfg.policies) j["policies"].push_back(policy_to_json(p));
    j["n_runs"] = cfg.n_runs;
    j["base_seed"] = cfg.base_seed;
    j["output"] = cfg.output_path;
    j["record_diagnostics"] = cfg.record_diagnostics;
    j["checkpoint_every"] = cfg.checkpoint_every;
    j["threads"] = cfg.threads;
    return j.dump(2);
}

std::string config_hash(const ExperimentConfig& cfg) {
    // FNV-1a over the canonical dump; threads/output do not affect results
    // but are part of the config record, so hash the scientific fields only.
    ExperimentConfig canon = cfg;
    canon.output_path.clear();
    canon.threads = 0;
    const std::string dump = config_to_json(canon);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

PolicyConfig preset_policy(Algorithm a, const EnvConfig& env, double lambda, double delta) {
    json j;
    j["algorithm"] = algorithm_name(a);
    j["lambda"] = lambda;
    j["delta"] = delta;
    if (a == Algorithm::UCB) {
        j["c_t_mode"] = "theory";
    } else {
        j["c_t_mode"] = "fixed";
        j["c_t"] = 1.0;
    }
    return parse_policy(j, env);
}

ExperimentConfig preset_experiment(LinkKind kind, int d, int num_arms, std::int64_t horizon,
                                   double s, double derivative_floor,
                                   const std::vector<Algorithm>& algorithms, int n_runs) {
    ExperimentConfig cfg;
    cfg.env.dim = d;
    cfg.env.num_arms = num_arms;
    cfg.env.horizon = horizon;
    cfg.env.theta_norm = s;
    cfg.env.noise_sigma = 1.0;
    cfg.env.context_mode = ContextMode::FreshEachRound;
    cfg.env.link = make_link(kind, derivative_floor, 1.0);
    const double lambda = 1e-4;
    const double delta = 1.0 / static_cast<double>(horizon);
    for (Algorithm a : algorithms) {
        cfg.policies.push_back(preset_policy(a, cfg.env, lambda, delta));
    }
    cfg.n_runs = n_runs;
    return cfg;
}

const std::vector<Algorithm> kAllAlgorithms = {Algorithm::FP,  Algorithm::EpsGreedy,
                                               Algorithm::UCB, Algorithm::TS,
                                               Algorithm::PHE, Algorithm::RandUCB};

}  // namespace

std::vector<std::string> preset_names() {
    return {"linear-fig2", "logistic-fig2", "regret-vs-d-fig3b"};
}

std::vector<std::pair<std::string, ExperimentConfig>> make_preset(const std::string& name,
                                                                  bool desk) {
    std::vector<std::pair<std::string, ExperimentConfig>> out;
    if (name == "linear-fig2") {
        ExperimentConfig cfg =
            desk ? preset_experiment(LinkKind::Linear, 10, 50, 5000, 2.0, 0.0, kAllAlgorithms, 50)
                 : preset_experiment(LinkKind::Linear, 20, 100, 20000, 2.0, 0.0, kAllAlgorithms,
                                     100);
        out.emplace_back("", cfg);
    } else if (name == "logistic-fig2") {
        ExperimentConfig cfg =
            desk ? preset_experiment(LinkKind::Logistic, 10, 50, 5000, 4.0, 0.25, kAllAlgorithms,
                                     50)
                 : preset_experiment(LinkKind::Logistic, 10, 100, 10000, 4.0, 0.25,
                                     kAllAlgorithms, 100);
        out.emplace_back("", cfg);
    } else if (name == "regret-vs-d-fig3b") {
        const std::int64_t horizon = desk ? 5000 : 20000;
        for (int d : {5, 10, 20}) {
            ExperimentConfig cfg = preset_experiment(LinkKind::Linear, d, 50, horizon, 2.0, 0.0,
                                                     {Algorithm::FP, Algorithm::TS}, 50);
            out.emplace_back("_d" + std::to_string(d), cfg);
        }
    } else {
        throw ConfigError("unknown preset: " + name);
    }
    return out;
}

}  // namespace fpbandits
