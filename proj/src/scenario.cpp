#include "optocool/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "optocool/constants.hpp"

namespace optocool {

namespace {

using nlohmann::json;

void require_keys(const json& j, const std::string& block,
                  const std::set<std::string>& required,
                  const std::set<std::string>& optional = {}) {
    for (const auto& [key, value] : j.items()) {
        if (!required.count(key) && !optional.count(key))
            throw ScenarioError("unknown key '" + key + "' in " + block);
    }
    for (const auto& key : required)
        if (!j.contains(key))
            throw ScenarioError("missing key '" + key + "' in " + block);
}

double num(const json& j, const std::string& block, const std::string& key) {
    const auto& v = j.at(key);
    if (!v.is_number()) throw ScenarioError(block + "." + key + " must be a number");
    return v.get<double>();
}

MembraneParams parse_membrane(const json& j) {
    require_keys(j, "membrane", {"mass_kg", "freq_hz", "linewidth_hz", "t_bath_k"});
    MembraneParams p;
    p.mass = num(j, "membrane", "mass_kg");
    p.omega_m = hz_to_rad(num(j, "membrane", "freq_hz"));
    p.gamma_m = hz_to_rad(num(j, "membrane", "linewidth_hz"));
    p.t_bath = num(j, "membrane", "t_bath_k");
    return p;
}

DetectionParams parse_detection(const json& j) {
    require_keys(j, "detection", {"s_xn_m2_per_hz"});
    return DetectionParams{num(j, "detection", "s_xn_m2_per_hz")};
}

FeedbackParams parse_feedback(const json& j) {
    require_keys(j, "feedback", {"gain_v"});
    FeedbackParams fb;
    fb.gain_v = num(j, "feedback", "gain_v");
    return fb;
}

AtomCouplingParams parse_atoms(const json& j) {
    require_keys(j, "atoms",
                 {"n_atoms", "mass_atom_kg", "freq_hz", "cooling_rate_hz",
                  "reflectivity", "finesse"});
    AtomCouplingParams a;
    a.n_atoms = num(j, "atoms", "n_atoms");
    a.mass_atom = num(j, "atoms", "mass_atom_kg");
    a.omega_a = hz_to_rad(num(j, "atoms", "freq_hz"));
    a.gamma_a = hz_to_rad(num(j, "atoms", "cooling_rate_hz"));
    a.reflectivity = num(j, "atoms", "reflectivity");
    a.finesse = num(j, "atoms", "finesse");
    return a;
}

AtomDecayModel parse_decay(const json& j) {
    require_keys(j, "decay", {"n0", "tau_s"});
    return AtomDecayModel{num(j, "decay", "n0"), num(j, "decay", "tau_s")};
}

Scheme parse_scheme(const std::string& s) {
    if (s == "semi-implicit-euler") return Scheme::semi_implicit_euler;
    if (s == "stochastic-heun") return Scheme::stochastic_heun;
    throw ScenarioError("unknown scheme '" + s + "'");
}

FeedbackMode parse_feedback_mode(const std::string& s) {
    if (s == "off") return FeedbackMode::off;
    if (s == "velocity") return FeedbackMode::velocity;
    throw ScenarioError("unknown feedback_mode '" + s + "'");
}

CouplingMode parse_coupling_mode(const std::string& s) {
    if (s == "off") return CouplingMode::off;
    if (s == "effective-damping") return CouplingMode::effective_damping;
    if (s == "two-oscillator") return CouplingMode::two_oscillator;
    throw ScenarioError("unknown coupling_mode '" + s + "'");
}

SimConfig parse_sim(const json& j) {
    require_keys(j, "sim", {"sample_rate_hz", "duration_s", "seed"},
                 {"scheme", "feedback_mode", "coupling_mode",
                  "derivative_cutoff_factor", "loop_delay_samples",
                  "atom_temperature_k"});
    SimConfig cfg;
    cfg.sample_rate = num(j, "sim", "sample_rate_hz");
    cfg.duration = num(j, "sim", "duration_s");
    if (!j.at("seed").is_number_integer())
        throw ScenarioError("sim.seed must be an integer");
    cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("scheme")) cfg.scheme = parse_scheme(j.at("scheme").get<std::string>());
    if (j.contains("feedback_mode"))
        cfg.feedback_mode = parse_feedback_mode(j.at("feedback_mode").get<std::string>());
    if (j.contains("coupling_mode"))
        cfg.coupling_mode = parse_coupling_mode(j.at("coupling_mode").get<std::string>());
    if (j.contains("derivative_cutoff_factor"))
        cfg.derivative_cutoff_factor = num(j, "sim", "derivative_cutoff_factor");
    if (j.contains("loop_delay_samples"))
        cfg.loop_delay_samples = j.at("loop_delay_samples").get<int>();
    if (j.contains("atom_temperature_k"))
        cfg.atom_temperature = num(j, "sim", "atom_temperature_k");
    return cfg;
}

std::vector<Stage> parse_stages(const json& j) {
    if (!j.is_array()) throw ScenarioError("stages must be an array");
    std::vector<Stage> out;
    for (const auto& s : j) {
        require_keys(s, "stages[]", {"t_s"}, {"gain_v", "g_s"});
        Stage st;
        st.t_start = num(s, "stages[]", "t_s");
        if (s.contains("gain_v")) st.gain_v = num(s, "stages[]", "gain_v");
        if (s.contains("g_s")) st.gamma_sym = num(s, "stages[]", "g_s");  // scaled below
        out.push_back(st);
    }
    return out;
}

}  // namespace

Scenario Scenario::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ScenarioError(std::string("scenario parse error: ") + e.what());
    }

    try {
        require_keys(j, "scenario", {"membrane", "detection", "sim"},
                     {"feedback", "sympathetic", "atoms", "decay", "stages",
                      "annotations"});
        Scenario sc;
        sc.membrane = parse_membrane(j.at("membrane"));
        sc.detection = parse_detection(j.at("detection"));
        if (j.contains("feedback")) sc.feedback = parse_feedback(j.at("feedback"));
        if (j.contains("sympathetic")) {
            require_keys(j.at("sympathetic"), "sympathetic", {"g_s"});
            sc.g_s = num(j.at("sympathetic"), "sympathetic", "g_s");
            if (!(*sc.g_s >= 0.0)) throw ScenarioError("sympathetic.g_s must be >= 0");
        }
        if (j.contains("atoms")) sc.atoms = parse_atoms(j.at("atoms"));
        if (j.contains("decay")) sc.decay = parse_decay(j.at("decay"));
        sc.sim = parse_sim(j.at("sim"));
        if (j.contains("stages")) {
            sc.stages = parse_stages(j.at("stages"));
            for (Stage& st : sc.stages) st.gamma_sym *= sc.membrane.gamma_m;
        }
        if (j.contains("annotations")) {
            for (const auto& [k, v] : j.at("annotations").items()) {
                if (!v.is_string())
                    throw ScenarioError("annotations values must be strings");
                sc.annotations[k] = v.get<std::string>();
            }
        }

        sc.membrane.validate();
        sc.detection.validate();
        sc.feedback.validate();
        if (sc.atoms) sc.atoms->validate();
        if (sc.decay) sc.decay->validate();
        sc.sim.validate(sc.membrane.omega_m);
        if (sc.sim.coupling_mode == CouplingMode::two_oscillator && !sc.atoms)
            throw ScenarioError("two-oscillator coupling requires an atoms block");
        if (sc.sim.coupling_mode == CouplingMode::effective_damping && !sc.g_s &&
            sc.stages.empty())
            throw ScenarioError(
                "effective-damping coupling requires sympathetic.g_s or stages");
        return sc;
    } catch (const json::exception& e) {
        throw ScenarioError(std::string("invalid scenario: ") + e.what());
    }
}

Scenario Scenario::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ScenarioError("cannot read scenario file: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return from_json_text(ss.str());
}

std::string file_hash_hex(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ScenarioError("cannot read file: " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char c;
    while (is.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

}  // namespace optocool
