#pragma once

#include <complex>

#include "optocool/params.hpp"

namespace optocool {

// Closed-form physics of feedback and sympathetic cooling.
//
// Unit conventions (used consistently across the whole library):
//  - every rate and frequency is angular (rad/s); file and CLI boundaries
//    convert from Hz with an explicit 2*pi,
//  - spectral densities are one-sided,
//  - mode temperature is defined through position-quadrature equipartition,
//    T = m * omega_m^2 * <x^2> / k_B.
namespace model {

// sqrt(hbar / (2 m omega_m))
double zero_point_motion(const MembraneParams& p);

// k_B T / (hbar omega); classical (high-T) occupation
double thermal_occupation(double t_kelvin, double omega);

// temperature relaxation after a cooling gain g is switched on at t = 0:
// T(t) = T_bath/(1+g) * (1 + g exp(-gamma_m (1+g) t))
double cooldown_trace(const MembraneParams& p, double gain, double t);

// steady-state temperature under velocity feedback including noise heating
double final_temperature_feedback(const MembraneParams& p, const DetectionParams& d,
                                  double gain_v);

// steady state of combined feedback + sympathetic cooling; reduces to
// final_temperature_feedback at g_s = 0 and to min_temp_sympathetic at g_v = 0
double final_temperature_combined(const MembraneParams& p, const DetectionParams& d,
                                  const CoolingGains& gains);

struct OptimalGain {
    double gain = 0.0;        // gain minimizing the steady-state temperature
    double temperature = 0.0; // temperature at that gain, K
};

// analytic minimizer of final_temperature_feedback over gain; throws
// std::domain_error("unbounded gain") when s_xn = 0
OptimalGain optimal_feedback_gain(const MembraneParams& p, const DetectionParams& d);

// light-mediated atom-membrane coupling rate
double coupling_rate_gN(const AtomCouplingParams& a, const MembraneParams& p);

// lorentzian sympathetic cooling rate; maximum 4 g_N^2 / gamma_a on resonance
double sympathetic_rate(double g_n, double gamma_a, double omega_a, double omega_m);

// C = 4 g_N^2 / (gamma_a gamma_m); equals sympathetic_rate(omega_a = omega_m)/gamma_m
double hybrid_cooperativity(double g_n, double gamma_a, double gamma_m);

// T_bath (1 + gamma_sym/gamma_m)^-1
double min_temp_sympathetic(double t_bath, double gamma_sym, double gamma_m);

// damped-oscillator susceptibility [m (omega_m^2 - omega^2 - i omega Gamma)]^-1;
// pass gamma_m * (1 + g_s) or gamma_m * (1 + g_v + g_s) for the effective
// cooled susceptibilities
std::complex<double> susceptibility_mech(double omega, const MembraneParams& p,
                                         double gamma_override);

// one-sided thermal force density 4 k_B T m gamma_m (fluctuation-dissipation)
double thermal_force_psd(const MembraneParams& p);

// true-displacement spectrum under combined cooling:
// |chi_eff,sf|^2 [ S_Fth + (m omega gamma_m g_v)^2 S_xn ]
double psd_out_of_loop(double omega, const MembraneParams& p, const DetectionParams& d,
                       const CoolingGains& gains);

// measured (in-loop) spectrum; squashes below s_xn near resonance at high gain:
// |chi_eff,sf|^2 [ S_Fth + |chi_eff,s|^-2 S_xn ]
double psd_in_loop(double omega, const MembraneParams& p, const DetectionParams& d,
                   const CoolingGains& gains);

struct GroundStateCheck {
    bool feasible = false;
    double margin = 0.0;  // (4 x_zp^2 / (n_th gamma_m)) / s_xn; infinity when s_xn = 0
};

// detection-noise requirement for feedback cooling to mean occupation < 1
GroundStateCheck ground_state_feasible(const MembraneParams& p, const DetectionParams& d);

// minimum temperature over time while atoms leave the coupling volume;
// gamma_sym(t) scales linearly with N(t) = n0 exp(-t/tau)
double atom_decay_temperature_trace(const MembraneParams& p, const AtomCouplingParams& a,
                                    const AtomDecayModel& decay, double t);

}  // namespace model
}  // namespace optocool
