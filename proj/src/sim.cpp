#include "optocool/sim.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "optocool/constants.hpp"

namespace optocool {

namespace {

constexpr std::uint64_t k_stream_init = 0;
constexpr std::uint64_t k_stream_thermal = 1;
constexpr std::uint64_t k_stream_meas = 2;
constexpr std::uint64_t k_stream_atom = 3;

double thermal_sigma_x(double mass, double omega, double t_kelvin) {
    return std::sqrt(k_boltzmann * t_kelvin / (mass * omega * omega));
}

double thermal_sigma_v(double mass, double t_kelvin) {
    return std::sqrt(k_boltzmann * t_kelvin / mass);
}

// per-sample amplitude of a white force with one-sided density s (N^2/Hz)
double impulse_sigma(double s_one_sided, double sample_rate) {
    return std::sqrt(s_one_sided * sample_rate / 2.0);
}

}  // namespace

std::size_t SimConfig::n_samples() const {
    return static_cast<std::size_t>(std::llround(duration * sample_rate));
}

void SimConfig::validate(double omega_m) const {
    if (!(sample_rate > 20.0 * omega_m / k_two_pi))
        throw std::invalid_argument("sample_rate must exceed 20x the mode frequency");
    if (!(duration > 0.0)) throw std::invalid_argument("duration must be > 0");
    if (n_samples() < 1) throw std::invalid_argument("duration too short for one sample");
    if (!(derivative_cutoff_factor > 0.0))
        throw std::invalid_argument("derivative_cutoff_factor must be > 0");
    if (loop_delay_samples < 0)
        throw std::invalid_argument("loop_delay_samples must be >= 0");
    if (!(atom_temperature >= 0.0))
        throw std::invalid_argument("atom_temperature must be >= 0");
}

MembraneSim::MembraneSim(const MembraneParams& p, const DetectionParams& d, double gain_v,
                         double gamma_sym, const SimConfig& cfg)
    : p_(p),
      cfg_(cfg),
      dt_(cfg.dt()),
      gain_v_(gain_v),
      gamma_sym_(gamma_sym),
      feedback_on_(cfg.feedback_mode == FeedbackMode::velocity),
      rng_thermal_(derive_stream_seed(cfg.seed, k_stream_thermal)),
      rng_meas_(derive_stream_seed(cfg.seed, k_stream_meas)) {
    p_.validate();
    d.validate();
    cfg_.validate(p.omega_m);
    if (!(gain_v >= 0.0)) throw std::invalid_argument("gain_v must be >= 0");
    if (!(gamma_sym >= 0.0)) throw std::invalid_argument("gamma_sym must be >= 0");

    sigma_force_ = impulse_sigma(4.0 * k_boltzmann * p.t_bath * p.mass * p.gamma_m,
                                 cfg.sample_rate);
    sigma_meas_ = impulse_sigma(d.s_xn, cfg.sample_rate);

    // initial condition: stationary thermal state of the undriven oscillator
    GaussianRng init(derive_stream_seed(cfg.seed, k_stream_init));
    x_ = thermal_sigma_x(p.mass, p.omega_m, p.t_bath) * init();
    v_ = thermal_sigma_v(p.mass, p.t_bath) * init();
    divergence_limit_ = 1e12 * std::max(thermal_sigma_x(p.mass, p.omega_m, p.t_bath),
                                        sigma_meas_) + 1e-30;

    // Derivative-estimator chain: first difference, then a one-pole band
    // limit at w_c = cutoff_factor * omega_m. Two taps (filtered derivative
    // and filtered position) are solved so that the discrete chain responds
    // as exactly i*omega_m at the mechanical resonance, i.e. the loop phase
    // is trimmed to pi/2 where it matters, the way a digital feedback loop
    // is tuned in practice.
    const double w_c = cfg.derivative_cutoff_factor * p.omega_m;
    alpha_ = std::exp(-w_c * dt_);
    const std::complex<double> z = std::exp(std::complex<double>(0.0, p.omega_m * dt_));
    const std::complex<double> z_inv = 1.0 / z;
    std::complex<double> h_lp = (1.0 - alpha_) / (1.0 - alpha_ * z_inv);
    const std::complex<double> delay =
        std::pow(z_inv, static_cast<double>(cfg.loop_delay_samples));
    const std::complex<double> h1 = h_lp * (1.0 - z_inv) / dt_ * delay;
    const std::complex<double> h2 = h_lp * delay;
    const double det =
        p.omega_m * (h1.real() * h2.imag() - h1.imag() * h2.real());
    if (std::abs(det) < 1e-300) throw std::invalid_argument("degenerate feedback chain");
    tap_d_ = -p.omega_m * p.omega_m * h2.real() / det;
    tap_p_ = p.omega_m * h1.real() / det;

    if (cfg.loop_delay_samples > 0)
        delay_line_.assign(static_cast<std::size_t>(cfg.loop_delay_samples), 0.0);
}

double MembraneSim::feedback_accel(double y) {
    const double diff = have_prev_ ? (y - y_prev_) / dt_ : 0.0;
    y_prev_ = y;
    have_prev_ = true;
    lp_deriv_ = alpha_ * lp_deriv_ + (1.0 - alpha_) * diff;
    lp_pos_ = alpha_ * lp_pos_ + (1.0 - alpha_) * y;
    double u = tap_d_ * lp_deriv_ + tap_p_ * p_.omega_m * lp_pos_;
    if (!delay_line_.empty()) {
        std::swap(u, delay_line_[delay_pos_]);
        delay_pos_ = (delay_pos_ + 1) % delay_line_.size();
    }
    return -p_.gamma_m * gain_v_ * u;
}

void MembraneSim::advance(double accel_ext) {
    const double w2 = p_.omega_m * p_.omega_m;
    const double gamma_t = p_.gamma_m + gamma_sym_;
    if (cfg_.scheme == Scheme::semi_implicit_euler) {
        const double a0 = -w2 * x_ - gamma_t * v_ + accel_ext;
        v_ += dt_ * a0;
        x_ += dt_ * v_;
    } else {
        const double a0 = -w2 * x_ - gamma_t * v_ + accel_ext;
        const double xp = x_ + dt_ * v_;
        const double vp = v_ + dt_ * a0;
        const double a1 = -w2 * xp - gamma_t * vp + accel_ext;
        const double x_new = x_ + 0.5 * dt_ * (v_ + vp);
        v_ += 0.5 * dt_ * (a0 + a1);
        x_ = x_new;
    }
    ++step_;
    if (!std::isfinite(x_) || std::fabs(x_) > divergence_limit_)
        throw IntegrationDiverged(step_);
}

SimSample MembraneSim::next() {
    const double xn = sigma_meas_ * rng_meas_();
    const SimSample s{x_, v_, x_ + xn};
    double accel = sigma_force_ / p_.mass * rng_thermal_();
    if (feedback_on_ && gain_v_ > 0.0) accel += feedback_accel(s.y);
    advance(accel);
    return s;
}

CoupledSim::CoupledSim(const MembraneParams& p, const AtomCouplingParams& a,
                       const SimConfig& cfg)
    : p_(p),
      a_(a),
      cfg_(cfg),
      dt_(cfg.dt()),
      rng_thermal_(derive_stream_seed(cfg.seed, k_stream_thermal)),
      rng_meas_(derive_stream_seed(cfg.seed, k_stream_meas)),
      rng_atom_(derive_stream_seed(cfg.seed, k_stream_atom)) {
    if (cfg.coupling_mode != CouplingMode::two_oscillator)
        throw std::invalid_argument("coupled run requires two-oscillator coupling mode");
    p_.validate();
    a_.validate();
    cfg_.validate(std::max(p.omega_m, a.omega_a));
    if (!(a.gamma_a * dt_ < 2.0))
        throw std::invalid_argument("sample_rate too low for the atom damping rate");

    // collective mode: N atoms acting as one oscillator of mass N m_a
    mass_atom_mode_ = std::max(a.n_atoms, 1.0) * a.mass_atom;
    const double r2 = a.reflectivity * a.reflectivity;
    g_n_ = r2 * a.omega_a *
           std::sqrt(a.n_atoms * a.mass_atom * a.omega_a / (p.mass * p.omega_m)) *
           2.0 * a.finesse / k_pi;
    lambda_ = 2.0 * g_n_ *
              std::sqrt(p.mass * mass_atom_mode_ * p.omega_m * a.omega_a);

    sigma_force_m_ = impulse_sigma(4.0 * k_boltzmann * p.t_bath * p.mass * p.gamma_m,
                                   cfg.sample_rate);
    sigma_force_a_ =
        cfg.atom_temperature > 0.0
            ? impulse_sigma(4.0 * k_boltzmann * cfg.atom_temperature * mass_atom_mode_ *
                                a.gamma_a,
                            cfg.sample_rate)
            : 0.0;

    GaussianRng init(derive_stream_seed(cfg.seed, k_stream_init));
    x_m_ = thermal_sigma_x(p.mass, p.omega_m, p.t_bath) * init();
    v_m_ = thermal_sigma_v(p.mass, p.t_bath) * init();
    if (cfg.atom_temperature > 0.0) {
        x_a_ = thermal_sigma_x(mass_atom_mode_, a.omega_a, cfg.atom_temperature) * init();
        v_a_ = thermal_sigma_v(mass_atom_mode_, cfg.atom_temperature) * init();
    }
    divergence_limit_ = 1e12 * thermal_sigma_x(p.mass, p.omega_m, p.t_bath) + 1e-30;
}

CoupledSample CoupledSim::next() {
    const CoupledSample s{x_m_, v_m_, x_a_, v_a_};
    const double f_m = sigma_force_m_ * rng_thermal_();
    const double f_a = sigma_force_a_ > 0.0 ? sigma_force_a_ * rng_atom_() : 0.0;

    const double wm2 = p_.omega_m * p_.omega_m;
    const double wa2 = a_.omega_a * a_.omega_a;
    const double am0 =
        -wm2 * x_m_ - p_.gamma_m * v_m_ + (f_m - lambda_ * x_a_) / p_.mass;
    const double aa0 =
        -wa2 * x_a_ - a_.gamma_a * v_a_ + (f_a - lambda_ * x_m_) / mass_atom_mode_;

    if (cfg_.scheme == Scheme::semi_implicit_euler) {
        v_m_ += dt_ * am0;
        v_a_ += dt_ * aa0;
        x_m_ += dt_ * v_m_;
        x_a_ += dt_ * v_a_;
    } else {
        const double xmp = x_m_ + dt_ * v_m_;
        const double vmp = v_m_ + dt_ * am0;
        const double xap = x_a_ + dt_ * v_a_;
        const double vap = v_a_ + dt_ * aa0;
        const double am1 =
            -wm2 * xmp - p_.gamma_m * vmp + (f_m - lambda_ * xap) / p_.mass;
        const double aa1 =
            -wa2 * xap - a_.gamma_a * vap + (f_a - lambda_ * xmp) / mass_atom_mode_;
        x_m_ += 0.5 * dt_ * (v_m_ + vmp);
        v_m_ += 0.5 * dt_ * (am0 + am1);
        x_a_ += 0.5 * dt_ * (v_a_ + vap);
        v_a_ += 0.5 * dt_ * (aa0 + aa1);
    }
    ++step_;
    if (!std::isfinite(x_m_) || std::fabs(x_m_) > divergence_limit_ ||
        !std::isfinite(x_a_))
        throw IntegrationDiverged(step_);
    return s;
}

Trajectory simulate_membrane(const MembraneParams& p, const DetectionParams& d,
                             const FeedbackParams& fb, double gamma_sym,
                             const SimConfig& cfg) {
    fb.validate();
    MembraneSim sim(p, d, cfg.feedback_mode == FeedbackMode::velocity ? fb.gain_v : 0.0,
                    gamma_sym, cfg);
    const std::size_t n = cfg.n_samples();
    Trajectory out;
    out.dt = cfg.dt();
    out.x.reserve(n);
    out.v.reserve(n);
    out.y.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const SimSample s = sim.next();
        out.x.push_back(s.x);
        out.v.push_back(s.v);
        out.y.push_back(s.y);
    }
    return out;
}

Trajectory simulate_coupled(const MembraneParams& p, const AtomCouplingParams& a,
                            const SimConfig& cfg) {
    CoupledSim sim(p, a, cfg);
    const std::size_t n = cfg.n_samples();
    Trajectory out;
    out.dt = cfg.dt();
    out.x.reserve(n);
    out.v.reserve(n);
    out.y.reserve(n);
    out.x_a.reserve(n);
    out.v_a.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const CoupledSample s = sim.next();
        out.x.push_back(s.x);
        out.v.push_back(s.v);
        out.y.push_back(s.x);  // no detection chain in coupled runs
        out.x_a.push_back(s.x_a);
        out.v_a.push_back(s.v_a);
    }
    return out;
}

Trajectory cooldown_experiment(const MembraneParams& p, const DetectionParams& d,
                               const std::vector<Stage>& schedule, const SimConfig& cfg) {
    if (schedule.empty()) throw std::invalid_argument("schedule must not be empty");
    if (schedule.front().t_start != 0.0)
        throw std::invalid_argument("first stage must start at t = 0");
    for (std::size_t i = 1; i < schedule.size(); ++i)
        if (!(schedule[i].t_start > schedule[i - 1].t_start))
            throw std::invalid_argument("stage start times must be increasing");
    for (const Stage& st : schedule)
        if (st.gain_v > 0.0 && cfg.feedback_mode != FeedbackMode::velocity)
            throw std::invalid_argument(
                "schedule applies feedback but feedback_mode is off");

    MembraneSim sim(p, d, schedule.front().gain_v, schedule.front().gamma_sym, cfg);
    const std::size_t n = cfg.n_samples();
    Trajectory out;
    out.dt = cfg.dt();
    out.x.reserve(n);
    out.v.reserve(n);
    out.y.reserve(n);

    std::size_t next_stage = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * cfg.dt();
        while (next_stage < schedule.size() && t >= schedule[next_stage].t_start) {
            const Stage& st = schedule[next_stage];
            sim.set_gain_v(st.gain_v);
            sim.set_gamma_sym(st.gamma_sym);
            out.stages.push_back({i, st.gain_v, st.gamma_sym});
            ++next_stage;
        }
        const SimSample s = sim.next();
        out.x.push_back(s.x);
        out.v.push_back(s.v);
        out.y.push_back(s.y);
    }
    return out;
}

}  // namespace optocool
