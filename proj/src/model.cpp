#include "optocool/model.hpp"

#include <cmath>
#include <limits>

namespace optocool {
namespace model {

namespace {

// m omega_m^3 / (4 k_B Q) = m omega_m^2 gamma_m / (4 k_B); converts the
// displacement noise floor into a heating temperature per unit gain^2
double noise_heating_coeff(const MembraneParams& p) {
    return p.mass * p.omega_m * p.omega_m * p.omega_m / (4.0 * k_boltzmann * p.quality());
}

}  // namespace

double zero_point_motion(const MembraneParams& p) {
    return std::sqrt(k_hbar / (2.0 * p.mass * p.omega_m));
}

double thermal_occupation(double t_kelvin, double omega) {
    if (!(t_kelvin >= 0.0)) throw std::invalid_argument("temperature must be >= 0");
    if (!(omega > 0.0)) throw std::invalid_argument("omega must be > 0");
    return k_boltzmann * t_kelvin / (k_hbar * omega);
}

double cooldown_trace(const MembraneParams& p, double gain, double t) {
    if (!(gain >= 0.0)) throw std::invalid_argument("gain must be >= 0");
    if (!(t >= 0.0)) throw std::invalid_argument("time must be >= 0");
    const double u = 1.0 + gain;
    return p.t_bath / u * (1.0 + gain * std::exp(-p.gamma_m * u * t));
}

double final_temperature_feedback(const MembraneParams& p, const DetectionParams& d,
                                  double gain_v) {
    if (!(gain_v >= 0.0)) throw std::invalid_argument("gain_v must be >= 0");
    const double u = 1.0 + gain_v;
    return p.t_bath / u + noise_heating_coeff(p) * gain_v * gain_v / u * d.s_xn;
}

double final_temperature_combined(const MembraneParams& p, const DetectionParams& d,
                                  const CoolingGains& gains) {
    gains.validate();
    const double u = 1.0 + gains.g_v + gains.g_s;
    return p.t_bath / u + noise_heating_coeff(p) * gains.g_v * gains.g_v / u * d.s_xn;
}

OptimalGain optimal_feedback_gain(const MembraneParams& p, const DetectionParams& d) {
    if (!(d.s_xn > 0.0)) throw std::domain_error("unbounded gain");
    const double ratio = p.t_bath / (noise_heating_coeff(p) * d.s_xn);
    OptimalGain out;
    out.gain = std::sqrt(1.0 + ratio) - 1.0;
    out.temperature = final_temperature_feedback(p, d, out.gain);
    return out;
}

double coupling_rate_gN(const AtomCouplingParams& a, const MembraneParams& p) {
    const double r2 = a.reflectivity * a.reflectivity;
    return r2 * a.omega_a *
           std::sqrt(a.n_atoms * a.mass_atom * a.omega_a / (p.mass * p.omega_m)) *
           2.0 * a.finesse / k_pi;
}

double sympathetic_rate(double g_n, double gamma_a, double omega_a, double omega_m) {
    if (!(gamma_a > 0.0)) throw std::invalid_argument("gamma_a must be > 0");
    const double det = omega_a - omega_m;
    const double hw = 0.5 * gamma_a;
    return g_n * g_n * gamma_a / (det * det + hw * hw);
}

double hybrid_cooperativity(double g_n, double gamma_a, double gamma_m) {
    if (!(gamma_a > 0.0 && gamma_m > 0.0))
        throw std::invalid_argument("rates must be > 0");
    return 4.0 * g_n * g_n / (gamma_a * gamma_m);
}

double min_temp_sympathetic(double t_bath, double gamma_sym, double gamma_m) {
    if (!(gamma_sym >= 0.0 && gamma_m > 0.0))
        throw std::invalid_argument("invalid rates");
    return t_bath / (1.0 + gamma_sym / gamma_m);
}

std::complex<double> susceptibility_mech(double omega, const MembraneParams& p,
                                         double gamma_override) {
    const std::complex<double> den(p.omega_m * p.omega_m - omega * omega,
                                   -omega * gamma_override);
    return 1.0 / (p.mass * den);
}

double thermal_force_psd(const MembraneParams& p) {
    return 4.0 * k_boltzmann * p.t_bath * p.mass * p.gamma_m;
}

namespace {

double abs2(std::complex<double> z) { return std::norm(z); }

}  // namespace

double psd_out_of_loop(double omega, const MembraneParams& p, const DetectionParams& d,
                       const CoolingGains& gains) {
    const double gamma_sf = p.gamma_m * (1.0 + gains.g_v + gains.g_s);
    const double chi2_sf = abs2(susceptibility_mech(omega, p, gamma_sf));
    const double fb_inv = p.mass * omega * p.gamma_m * gains.g_v;  // |chi_fb^-1|
    return chi2_sf * (thermal_force_psd(p) + fb_inv * fb_inv * d.s_xn);
}

double psd_in_loop(double omega, const MembraneParams& p, const DetectionParams& d,
                   const CoolingGains& gains) {
    const double gamma_sf = p.gamma_m * (1.0 + gains.g_v + gains.g_s);
    const double gamma_s = p.gamma_m * (1.0 + gains.g_s);
    const double chi2_sf = abs2(susceptibility_mech(omega, p, gamma_sf));
    const double chi2_s_inv = 1.0 / abs2(susceptibility_mech(omega, p, gamma_s));
    return chi2_sf * (thermal_force_psd(p) + chi2_s_inv * d.s_xn);
}

GroundStateCheck ground_state_feasible(const MembraneParams& p, const DetectionParams& d) {
    const double xzp = zero_point_motion(p);
    const double n_th = thermal_occupation(p.t_bath, p.omega_m);
    const double bound = 4.0 * xzp * xzp / (n_th * p.gamma_m);
    GroundStateCheck out;
    out.margin = d.s_xn > 0.0 ? bound / d.s_xn : std::numeric_limits<double>::infinity();
    out.feasible = out.margin > 1.0;
    return out;
}

double atom_decay_temperature_trace(const MembraneParams& p, const AtomCouplingParams& a,
                                    const AtomDecayModel& decay, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("time must be >= 0");
    AtomCouplingParams at = a;
    at.n_atoms = decay.n_at(t);
    const double g_n = coupling_rate_gN(at, p);
    const double gamma_sym = sympathetic_rate(g_n, a.gamma_a, a.omega_a, p.omega_m);
    return min_temp_sympathetic(p.t_bath, gamma_sym, p.gamma_m);
}

}  // namespace model
}  // namespace optocool
