#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "optocool/params.hpp"
#include "optocool/rng.hpp"
#include "optocool/trajectory.hpp"

namespace optocool {

enum class Scheme { semi_implicit_euler, stochastic_heun };
enum class FeedbackMode { off, velocity };
enum class CouplingMode { off, effective_damping, two_oscillator };

struct SimConfig {
    double sample_rate = 0.0;  // Hz
    double duration = 0.0;     // s
    std::uint64_t seed = 1;
    Scheme scheme = Scheme::semi_implicit_euler;
    FeedbackMode feedback_mode = FeedbackMode::off;
    CouplingMode coupling_mode = CouplingMode::off;

    // feedback loop shaping: single-pole band limit on the derivative
    // estimator at derivative_cutoff_factor * omega_m, plus an optional pure
    // loop delay in samples
    double derivative_cutoff_factor = 5.0;
    int loop_delay_samples = 0;

    // optional thermal drive of the atom mode (two-oscillator runs)
    double atom_temperature = 0.0;  // K

    double dt() const { return 1.0 / sample_rate; }
    std::size_t n_samples() const;
    void validate(double omega_m) const;
};

struct IntegrationDiverged : std::runtime_error {
    explicit IntegrationDiverged(std::size_t at_step)
        : std::runtime_error("integration diverged at step " + std::to_string(at_step)),
          step(at_step) {}
    std::size_t step;
};

// One sample of a running simulation (state before the step is taken).
struct SimSample {
    double x = 0.0;
    double v = 0.0;
    double y = 0.0;
};

// Streaming integrator for the membrane with measurement-based velocity
// feedback and a viscous sympathetic-damping term. Emits one sample per
// next() call; state advances behind it. Gains may be changed between calls
// (staged experiments).
class MembraneSim {
public:
    MembraneSim(const MembraneParams& p, const DetectionParams& d, double gain_v,
                double gamma_sym, const SimConfig& cfg);

    SimSample next();

    void set_gain_v(double g) { gain_v_ = g; }
    void set_gamma_sym(double g) { gamma_sym_ = g; }
    double gain_v() const { return gain_v_; }
    double gamma_sym() const { return gamma_sym_; }
    std::size_t step_count() const { return step_; }

private:
    double feedback_accel(double y);
    void advance(double accel_ext);

    MembraneParams p_;
    SimConfig cfg_;
    double dt_;
    double gain_v_;
    double gamma_sym_;
    bool feedback_on_;

    double sigma_force_;  // per-sample thermal force
    double sigma_meas_;   // per-sample displacement noise
    double x_ = 0.0, v_ = 0.0;

    // derivative-estimator chain state
    double alpha_ = 0.0;       // one-pole coefficient exp(-w_c dt)
    double tap_d_ = 0.0;       // calibrated derivative tap
    double tap_p_ = 0.0;       // calibrated position tap
    double lp_deriv_ = 0.0;
    double lp_pos_ = 0.0;
    double y_prev_ = 0.0;
    bool have_prev_ = false;
    std::vector<double> delay_line_;
    std::size_t delay_pos_ = 0;

    double divergence_limit_ = 0.0;
    std::size_t step_ = 0;

    GaussianRng rng_thermal_;
    GaussianRng rng_meas_;
};

struct CoupledSample {
    double x = 0.0, v = 0.0;      // membrane
    double x_a = 0.0, v_a = 0.0;  // atom mode
};

// Two mutually coupled damped oscillators: membrane (thermally driven) and
// collective atom mode (cold damper, optional thermal drive). The bilinear
// coupling is normalized so that eliminating a fast atom mode adds
// 4 g_N^2 omega_m omega_a Gamma_a / ((omega_a^2-omega_m^2)^2 + omega_m^2 Gamma_a^2)
// of damping to the membrane, i.e. the lorentzian sympathetic rate near
// resonance and exactly 4 g_N^2 / Gamma_a on resonance.
class CoupledSim {
public:
    CoupledSim(const MembraneParams& p, const AtomCouplingParams& a, const SimConfig& cfg);

    CoupledSample next();
    double coupling_rate() const { return g_n_; }

private:
    MembraneParams p_;
    AtomCouplingParams a_;
    SimConfig cfg_;
    double dt_;
    double g_n_ = 0.0;
    double mass_atom_mode_ = 0.0;
    double lambda_ = 0.0;  // bilinear coupling, N/m

    double sigma_force_m_ = 0.0;
    double sigma_force_a_ = 0.0;
    double x_m_ = 0.0, v_m_ = 0.0, x_a_ = 0.0, v_a_ = 0.0;

    double divergence_limit_ = 0.0;
    std::size_t step_ = 0;

    GaussianRng rng_thermal_;
    GaussianRng rng_meas_;  // reserved; keeps stream layout shared with MembraneSim
    GaussianRng rng_atom_;
};

// Convenience drivers collecting full trajectories.
Trajectory simulate_membrane(const MembraneParams& p, const DetectionParams& d,
                             const FeedbackParams& fb, double gamma_sym,
                             const SimConfig& cfg);

Trajectory simulate_coupled(const MembraneParams& p, const AtomCouplingParams& a,
                            const SimConfig& cfg);

// Piecewise-constant schedule of (gain_v, gamma_sym); first stage must start
// at t = 0. Stage boundaries are recorded in the trajectory.
struct Stage {
    double t_start = 0.0;    // s
    double gain_v = 0.0;
    double gamma_sym = 0.0;  // rad/s
};

Trajectory cooldown_experiment(const MembraneParams& p, const DetectionParams& d,
                               const std::vector<Stage>& schedule, const SimConfig& cfg);

}  // namespace optocool
