#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "optocool/params.hpp"
#include "optocool/sim.hpp"

namespace optocool {

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A complete description of one run, loaded from a JSON scenario file.
// File values use Hz; they are converted to angular rates here, once.
struct Scenario {
    MembraneParams membrane;
    DetectionParams detection;
    FeedbackParams feedback;
    std::optional<double> g_s;               // effective sympathetic gain
    std::optional<AtomCouplingParams> atoms;  // two-oscillator coupling
    std::optional<AtomDecayModel> decay;
    std::vector<Stage> stages;
    SimConfig sim;
    std::map<std::string, std::string> annotations;

    // gamma_sym for effective-damping runs (0 when no g_s configured)
    double gamma_sym_effective() const {
        return g_s ? *g_s * membrane.gamma_m : 0.0;
    }

    static Scenario from_json_text(const std::string& text);
    static Scenario load(const std::string& path);
};

// FNV-1a hash of the scenario file bytes, for CSV provenance lines.
std::string file_hash_hex(const std::string& path);

}  // namespace optocool
