#pragma once

#include <cmath>
#include <stdexcept>

#include "optocool/constants.hpp"

namespace optocool {

// Mechanical mode of the membrane. All rates angular (rad/s).
struct MembraneParams {
    double mass = 0.0;     // kg
    double omega_m = 0.0;  // rad/s
    double gamma_m = 0.0;  // rad/s
    double t_bath = 0.0;   // K

    double quality() const { return omega_m / gamma_m; }
    double spring_constant() const { return mass * omega_m * omega_m; }

    void validate() const {
        if (!(mass > 0.0)) throw std::invalid_argument("membrane mass must be > 0");
        if (!(omega_m > 0.0)) throw std::invalid_argument("membrane omega_m must be > 0");
        if (!(gamma_m > 0.0)) throw std::invalid_argument("membrane gamma_m must be > 0");
        if (!(t_bath > 0.0)) throw std::invalid_argument("membrane t_bath must be > 0");
        if (!(quality() > 1.0)) throw std::invalid_argument("membrane Q must exceed 1");
    }
};

struct DetectionParams {
    double s_xn = 0.0;  // one-sided displacement noise floor, m^2/Hz

    void validate() const {
        if (!(s_xn >= 0.0)) throw std::invalid_argument("detection s_xn must be >= 0");
    }
};

struct FeedbackParams {
    double gain_v = 0.0;             // dimensionless velocity gain
    double phase_eff = k_pi / 2.0;   // rad; only velocity feedback (pi/2) is modeled

    double cooldown_time(double gamma_m) const {
        if (!(gain_v > 0.0)) throw std::domain_error("cooldown time undefined at zero gain");
        return 1.0 / (gamma_m * gain_v);
    }

    void validate() const {
        if (!(gain_v >= 0.0)) throw std::invalid_argument("feedback gain_v must be >= 0");
    }
};

struct AtomCouplingParams {
    double n_atoms = 0.0;       // dimensionless
    double mass_atom = 0.0;     // kg
    double omega_a = 0.0;       // rad/s, lattice trap frequency
    double gamma_a = 0.0;       // rad/s, laser cooling rate
    double reflectivity = 0.0;  // |r_m|, amplitude, in [0,1]
    double finesse = 0.0;       // cavity finesse

    void validate() const {
        if (!(n_atoms >= 0.0)) throw std::invalid_argument("n_atoms must be >= 0");
        if (!(mass_atom > 0.0)) throw std::invalid_argument("mass_atom must be > 0");
        if (!(omega_a > 0.0)) throw std::invalid_argument("omega_a must be > 0");
        if (!(gamma_a > 0.0)) throw std::invalid_argument("gamma_a must be > 0");
        if (!(reflectivity >= 0.0 && reflectivity <= 1.0))
            throw std::invalid_argument("reflectivity must be in [0,1]");
        if (!(finesse > 0.0)) throw std::invalid_argument("finesse must be > 0");
    }
};

// Exponential loss of atoms from the coupling volume: N(t) = n0 exp(-t/tau).
struct AtomDecayModel {
    double n0 = 0.0;   // initial atom number
    double tau = 0.0;  // 1/e time, s

    double n_at(double t) const { return n0 * std::exp(-t / tau); }

    void validate() const {
        if (!(n0 >= 0.0)) throw std::invalid_argument("decay n0 must be >= 0");
        if (!(tau > 0.0)) throw std::invalid_argument("decay tau must be > 0");
    }
};

// Dimensionless cooling gains: velocity feedback and sympathetic
// (g_s = Gamma_sym / Gamma_m).
struct CoolingGains {
    double g_v = 0.0;
    double g_s = 0.0;

    void validate() const {
        if (!(g_v >= 0.0)) throw std::invalid_argument("g_v must be >= 0");
        if (!(g_s >= 0.0)) throw std::invalid_argument("g_s must be >= 0");
    }
};

}  // namespace optocool
