#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "optocool/params.hpp"
#include "optocool/spectral.hpp"

namespace optocool {

struct FitResult {
    std::map<std::string, double> params;
    std::map<std::string, double> stderrs;  // empty when the jacobian is rank-deficient
    double residual_norm = 0.0;             // sqrt(sum of squared weighted residuals)
    bool converged = false;
    int n_iter = 0;
    std::vector<std::string> flags;  // diagnostics, e.g. "weakly-identified-gain"

    bool has_flag(const std::string& f) const;
    std::string to_json() const;
};

using CurveModel = std::function<double(double, std::span<const double>)>;

struct CurveData {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> sigma;  // empty: unit weights
};

struct LsqOptions {
    std::vector<double> lower;  // empty: unbounded
    std::vector<double> upper;
    int max_iter = 200;
    double ftol = 1e-14;
    double gtol = 1e-12;
    std::vector<double>* cost_trace = nullptr;  // accepted costs, for diagnostics
};

// Damped (Levenberg-Marquardt) least squares with a forward-difference
// jacobian and box bounds by projection. Deterministic given inputs.
FitResult least_squares(const CurveModel& model, const CurveData& data,
                        const std::vector<std::string>& names,
                        std::vector<double> init, const LsqOptions& opts = {});

// T(t) = t_bath/(1+g) (1 + g exp(-gamma_m (1+g) t)); fits {g, t_bath}.
FitResult fit_cooldown(const ZeroSpanTrace& trace, double gamma_m);

// Fits the in-loop spectrum model with g_v as the only free parameter
// (log-density residuals). init_g_v < 0 selects the documented heuristic:
// invert the model at the resonance bin for g_v.
FitResult fit_inloop_spectrum(const Spectrum& s, const MembraneParams& p,
                              const DetectionParams& d, double g_s,
                              double init_g_v = -1.0);

// Out-of-loop temperature reconstructed from a fitted in-loop gain.
double extract_final_temperature(const FitResult& fit, const MembraneParams& p,
                                 const DetectionParams& d, double g_s);

// Fits {t_bath, s_xn_eff} to (g_v, T) points; reports the curve minimum
// (g_opt, t_min) as derived parameters.
FitResult fit_gain_temperature_curve(const std::vector<std::pair<double, double>>& points,
                                     const MembraneParams& p, double g_s = 0.0);

// Fits the sympathetic-rate resonance, gamma_sym(omega_a) =
// (s w_a^{3/2})^2 gamma_a / ((w_a - w_m)^2 + (gamma_a/2)^2), for
// {g_n_scale, gamma_a, omega_m}; also reports gamma_a_over_omega_m.
FitResult fit_sympathetic_resonance(const std::vector<std::pair<double, double>>& points);

// Lorentzian-plus-floor peak fit: {f0, fwhm, height, floor}.
FitResult estimate_linewidth(const Spectrum& s);

}  // namespace optocool
