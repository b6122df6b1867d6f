#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "optocool/scenario.hpp"

namespace optocool {
namespace commands {

inline constexpr const char* k_tool_version = "0.1.0";

// exit codes shared by all commands
inline constexpr int k_exit_ok = 0;
inline constexpr int k_exit_input_error = 2;
inline constexpr int k_exit_numerical_error = 3;

// Result of the simulate -> spectrum -> fit chain on one scenario run.
struct RunAnalysis {
    double band_temp_k = 0.0;   // equipartition temperature of the true x tail
    double fitted_g_v = 0.0;    // NaN when no feedback fit was attempted
    double t_final_k = 0.0;     // reconstructed steady-state temperature (NaN w/o fit)
    double n_bar = 0.0;         // occupancy of the reported temperature
    double fwhm_hz = 0.0;       // lorentzian linewidth of the x spectrum (NaN if unfit)
    double gamma_sym_fit = 0.0; // rad/s, from linewidth (coupled runs; NaN otherwise)
    double runtime_s = 0.0;
};

RunAnalysis run_and_analyze(const Scenario& sc);

// Feasibility numbers behind `check`, exposed for tests.
struct CheckWhatIf {
    std::string label;
    double margin = 0.0;
    double margin_ratio = 0.0;  // vs baseline
    bool feasible = false;
    double c_hybrid = 0.0;      // NaN without an atoms block
    double c_ratio = 0.0;
};

struct FeasibilityReport {
    double x_zp = 0.0;
    double n_th = 0.0;
    double margin = 0.0;
    bool feasible = false;
    double g_n = 0.0;                  // NaN without atoms
    double gamma_sym_at_omega_a = 0.0; // rad/s
    double gamma_sym_resonant = 0.0;   // rad/s
    double c_hybrid = 0.0;
    bool strong_coupling = false;      // c_hybrid > n_th
    std::vector<CheckWhatIf> what_ifs;
};

FeasibilityReport make_check_report(const Scenario& sc);

int cmd_simulate(const std::string& scenario_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed_override = {});

int cmd_sweep(const std::string& scenario_path, const std::string& param_key,
              const std::vector<double>& values, const std::string& out_dir,
              std::optional<std::uint64_t> seed_override = {});

int cmd_reproduce(const std::string& figure_id, const std::string& out_dir);

int cmd_check(const std::string& scenario_path);

const std::vector<std::string>& known_figures();

}  // namespace commands
}  // namespace optocool
