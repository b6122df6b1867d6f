#include "optocool/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "optocool/constants.hpp"
#include "optocool/model.hpp"

namespace optocool {

bool FitResult::has_flag(const std::string& f) const {
    return std::find(flags.begin(), flags.end(), f) != flags.end();
}

std::string FitResult::to_json() const {
    nlohmann::json j;
    j["params"] = params;
    j["stderr"] = stderrs;
    j["residual_norm"] = residual_norm;
    j["converged"] = converged;
    j["n_iter"] = n_iter;
    j["flags"] = flags;
    return j.dump(2);
}

namespace {

// Cholesky solve of (A + damp*diag(A)) delta = -g; returns false when the
// damped matrix is not positive definite.
bool solve_damped(std::vector<double> a, std::vector<double> g, double damp,
                  std::size_t n, std::vector<double>& delta) {
    for (std::size_t i = 0; i < n; ++i) a[i * n + i] *= 1.0 + damp;
    // in-place Cholesky
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            if (i == j) {
                if (!(s > 0.0)) return false;
                a[i * n + i] = std::sqrt(s);
            } else {
                a[i * n + j] = s / a[j * n + j];
            }
        }
    }
    // forward then backward substitution on -g
    delta.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = -g[i];
        for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * delta[k];
        delta[i] = s / a[i * n + i];
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = delta[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= a[k * n + ii] * delta[k];
        delta[ii] = s / a[ii * n + ii];
    }
    return true;
}

// full inverse via Cholesky (undamped); false when rank-deficient
bool invert_spd(std::vector<double> a, std::size_t n, std::vector<double>& inv) {
    std::vector<std::vector<double>> cols(n);
    for (std::size_t c = 0; c < n; ++c) {
        std::vector<double> e(n, 0.0);
        e[c] = -1.0;  // solve_damped negates
        if (!solve_damped(a, e, 0.0, n, cols[c])) return false;
    }
    inv.assign(n * n, 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) inv[r * n + c] = cols[c][r];
    return true;
}

}  // namespace

FitResult least_squares(const CurveModel& model, const CurveData& data,
                        const std::vector<std::string>& names,
                        std::vector<double> init, const LsqOptions& opts) {
    const std::size_t n_pts = data.x.size();
    const std::size_t n_par = init.size();
    if (names.size() != n_par) throw std::invalid_argument("names/init size mismatch");
    if (data.y.size() != n_pts) throw std::invalid_argument("x/y size mismatch");
    if (!data.sigma.empty() && data.sigma.size() != n_pts)
        throw std::invalid_argument("sigma size mismatch");
    if (n_pts <= n_par) throw std::invalid_argument("need more points than parameters");
    if (!opts.lower.empty() && opts.lower.size() != n_par)
        throw std::invalid_argument("lower bound size mismatch");
    if (!opts.upper.empty() && opts.upper.size() != n_par)
        throw std::invalid_argument("upper bound size mismatch");

    auto lo = [&](std::size_t j) {
        return opts.lower.empty() ? -std::numeric_limits<double>::infinity()
                                  : opts.lower[j];
    };
    auto hi = [&](std::size_t j) {
        return opts.upper.empty() ? std::numeric_limits<double>::infinity()
                                  : opts.upper[j];
    };
    for (std::size_t j = 0; j < n_par; ++j)
        if (init[j] < lo(j) || init[j] > hi(j))
            throw std::invalid_argument("init outside bounds");

    std::vector<double> scale(n_par);
    for (std::size_t j = 0; j < n_par; ++j)
        scale[j] = std::fabs(init[j]) > 0.0 ? std::fabs(init[j]) : 1.0;

    auto residuals = [&](const std::vector<double>& p, std::vector<double>& r) {
        r.resize(n_pts);
        for (std::size_t i = 0; i < n_pts; ++i) {
            const double m = model(data.x[i], p);
            const double s = data.sigma.empty() ? 1.0 : data.sigma[i];
            r[i] = (m - data.y[i]) / s;
            if (!std::isfinite(r[i])) return false;
        }
        return true;
    };
    auto cost_of = [](const std::vector<double>& r) {
        double c = 0.0;
        for (double v : r) c += v * v;
        return c;
    };

    std::vector<double> p = std::move(init);
    std::vector<double> r;
    if (!residuals(p, r))
        throw std::invalid_argument("model is not finite at the initial point");
    double cost = cost_of(r);
    if (opts.cost_trace) opts.cost_trace->push_back(cost);

    auto jacobian = [&](const std::vector<double>& at, const std::vector<double>& r0,
                        std::vector<double>& jac) {
        jac.assign(n_pts * n_par, 0.0);
        std::vector<double> pj = at, rj;
        for (std::size_t j = 0; j < n_par; ++j) {
            double h = std::sqrt(std::numeric_limits<double>::epsilon()) *
                       std::max(std::fabs(at[j]), 1e-3 * scale[j]);
            if (h == 0.0) h = 1e-10;
            if (at[j] + h > hi(j)) h = -h;  // step inward at an active bound
            pj[j] = at[j] + h;
            const bool ok = residuals(pj, rj);
            pj[j] = at[j];
            if (!ok) return false;
            const double inv_h = 1.0 / h;
            for (std::size_t i = 0; i < n_pts; ++i)
                jac[i * n_par + j] = (rj[i] - r0[i]) * inv_h;
        }
        return true;
    };

    FitResult out;
    double damp = 1e-3;
    int iter = 0;
    bool converged = false;
    std::vector<double> jac, jtj(n_par * n_par), jtr(n_par), delta, p_try, r_try;

    while (iter < opts.max_iter && !converged) {
        ++iter;
        if (!jacobian(p, r, jac)) break;
        std::fill(jtj.begin(), jtj.end(), 0.0);
        std::fill(jtr.begin(), jtr.end(), 0.0);
        for (std::size_t i = 0; i < n_pts; ++i) {
            for (std::size_t a = 0; a < n_par; ++a) {
                jtr[a] += jac[i * n_par + a] * r[i];
                for (std::size_t b = 0; b <= a; ++b)
                    jtj[a * n_par + b] += jac[i * n_par + a] * jac[i * n_par + b];
            }
        }
        for (std::size_t a = 0; a < n_par; ++a)
            for (std::size_t b = a + 1; b < n_par; ++b)
                jtj[a * n_par + b] = jtj[b * n_par + a];

        // scaled gradient test
        double gmax = 0.0;
        for (std::size_t j = 0; j < n_par; ++j)
            gmax = std::max(gmax, std::fabs(jtr[j]) * std::max(std::fabs(p[j]), scale[j]));
        if (gmax <= opts.gtol * std::max(cost, 1e-300)) {
            converged = true;
            break;
        }

        bool accepted = false;
        while (!accepted && damp < 1e14) {
            if (!solve_damped(jtj, jtr, damp, n_par, delta)) {
                damp *= 10.0;
                continue;
            }
            p_try = p;
            for (std::size_t j = 0; j < n_par; ++j)
                p_try[j] = std::clamp(p[j] + delta[j], lo(j), hi(j));
            if (residuals(p_try, r_try)) {
                const double cost_try = cost_of(r_try);
                if (cost_try < cost) {
                    const double drop = (cost - cost_try) / std::max(cost, 1e-300);
                    p = p_try;
                    r = r_try;
                    cost = cost_try;
                    if (opts.cost_trace) opts.cost_trace->push_back(cost);
                    damp = std::max(damp * 0.3, 1e-14);
                    accepted = true;
                    if (drop < opts.ftol) converged = true;
                    break;
                }
            }
            damp *= 10.0;
        }
        if (!accepted) {
            // no downhill step found at any damping: local minimum
            converged = true;
            break;
        }
    }

    out.converged = converged;
    out.n_iter = iter;
    out.residual_norm = std::sqrt(cost);
    for (std::size_t j = 0; j < n_par; ++j) out.params[names[j]] = p[j];
    if (!converged) out.flags.push_back("max-iterations");

    // covariance-based uncertainties; omitted when J^T J is rank-deficient
    if (residuals(p, r) && jacobian(p, r, jac)) {
        std::fill(jtj.begin(), jtj.end(), 0.0);
        for (std::size_t i = 0; i < n_pts; ++i)
            for (std::size_t a = 0; a < n_par; ++a)
                for (std::size_t b = 0; b <= a; ++b)
                    jtj[a * n_par + b] += jac[i * n_par + a] * jac[i * n_par + b];
        for (std::size_t a = 0; a < n_par; ++a)
            for (std::size_t b = a + 1; b < n_par; ++b)
                jtj[a * n_par + b] = jtj[b * n_par + a];
        std::vector<double> inv;
        if (invert_spd(jtj, n_par, inv)) {
            const double dof = static_cast<double>(n_pts - n_par);
            const double var_scale = cost / dof;
            for (std::size_t j = 0; j < n_par; ++j) {
                const double vj = inv[j * n_par + j] * var_scale;
                if (vj >= 0.0) out.stderrs[names[j]] = std::sqrt(vj);
            }
        } else {
            out.flags.push_back("rank-deficient-jacobian");
        }
    }
    return out;
}

FitResult fit_cooldown(const ZeroSpanTrace& trace, double gamma_m) {
    if (trace.t.size() < 4) throw std::invalid_argument("trace too short to fit");
    if (!(gamma_m > 0.0)) throw std::invalid_argument("gamma_m must be > 0");

    const double head = trace.temperature.front();
    double tail = 0.0;
    const std::size_t n_tail = std::max<std::size_t>(1, trace.t.size() / 10);
    for (std::size_t i = trace.t.size() - n_tail; i < trace.t.size(); ++i)
        tail += trace.temperature[i];
    tail /= static_cast<double>(n_tail);

    const double g0 = std::max(head / std::max(tail, 1e-300) - 1.0, 1e-6);
    CurveData data{trace.t, trace.temperature, {}};
    const CurveModel m = [gamma_m](double t, std::span<const double> p) {
        const double g = p[0], tb = p[1];
        const double u = 1.0 + g;
        return tb / u * (1.0 + g * std::exp(-gamma_m * u * t));
    };
    LsqOptions opts;
    opts.lower = {0.0, 0.0};
    opts.upper = {1e9, std::numeric_limits<double>::infinity()};
    FitResult fit = least_squares(m, data, {"g", "t_bath"}, {g0, head}, opts);

    const double g_hat = fit.params.at("g");
    const double span_needed = 3.0 / (gamma_m * (1.0 + g_hat));
    if (trace.t.back() - trace.t.front() < span_needed)
        fit.flags.push_back("trace-shorter-than-3-time-constants");
    const auto se = fit.stderrs.find("g");
    if (se != fit.stderrs.end() && g_hat < 10.0 * se->second)
        fit.flags.push_back("weakly-identified-gain");
    return fit;
}

FitResult fit_inloop_spectrum(const Spectrum& s, const MembraneParams& p,
                              const DetectionParams& d, double g_s, double init_g_v) {
    p.validate();
    d.validate();
    if (!(g_s >= 0.0)) throw std::invalid_argument("g_s must be >= 0");
    CurveData data;
    for (std::size_t i = 0; i < s.freq.size(); ++i) {
        if (s.psd[i] > 0.0) {
            data.x.push_back(s.freq[i]);
            data.y.push_back(std::log(s.psd[i]));
        }
    }
    if (data.x.size() < 8) throw std::invalid_argument("too few usable spectrum bins");

    double g0 = init_g_v;
    if (g0 < 0.0) {
        // invert the model at the resonance bin for the initial gain
        const double f_m = p.omega_m / k_two_pi;
        std::size_t i_res = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < s.freq.size(); ++i) {
            const double dist = std::fabs(s.freq[i] - f_m);
            if (dist < best) {
                best = dist;
                i_res = i;
            }
        }
        const double s_res = std::max(s.psd[i_res], 1e-300);
        const double peak_num =
            model::thermal_force_psd(p) /
                (p.mass * p.mass * p.omega_m * p.omega_m * p.gamma_m * p.gamma_m) +
            (1.0 + g_s) * (1.0 + g_s) * d.s_xn;
        g0 = std::sqrt(std::max(peak_num / s_res, 1.0)) - 1.0 - g_s;
        g0 = std::clamp(g0, 1e-3, 1e7);
    }

    const CurveModel m = [&p, &d, g_s](double f, std::span<const double> par) {
        const CoolingGains gains{par[0], g_s};
        return std::log(model::psd_in_loop(k_two_pi * f, p, d, gains));
    };
    LsqOptions opts;
    opts.lower = {0.0};
    opts.upper = {1e7};
    FitResult fit = least_squares(m, data, {"g_v"}, {g0}, opts);

    const double gamma_eff = p.gamma_m * (1.0 + fit.params.at("g_v") + g_s);
    if (s.freq.back() - s.freq.front() < 10.0 * gamma_eff / k_two_pi)
        fit.flags.push_back("band-narrower-than-10-linewidths");
    return fit;
}

double extract_final_temperature(const FitResult& fit, const MembraneParams& p,
                                 const DetectionParams& d, double g_s) {
    if (!fit.converged) throw std::invalid_argument("fit did not converge");
    const CoolingGains gains{fit.params.at("g_v"), g_s};
    return model::final_temperature_combined(p, d, gains);
}

FitResult fit_gain_temperature_curve(const std::vector<std::pair<double, double>>& points,
                                     const MembraneParams& p, double g_s) {
    if (points.size() < 5) throw std::invalid_argument("need at least 5 points");
    p.validate();

    CurveData data;
    for (const auto& [gv, temp] : points) {
        if (!(gv >= 0.0) || !(temp > 0.0))
            throw std::invalid_argument("points must have g_v >= 0 and T > 0");
        data.x.push_back(gv);
        data.y.push_back(std::log(temp));
    }

    const double coeff =
        p.mass * p.omega_m * p.omega_m * p.omega_m / (4.0 * k_boltzmann * p.quality());

    // heuristics: bath from the lowest-gain point, noise from the highest
    auto lowest = *std::min_element(points.begin(), points.end());
    auto highest = *std::max_element(points.begin(), points.end());
    const double tb0 = lowest.second * (1.0 + lowest.first + g_s);
    const double u_hi = 1.0 + highest.first + g_s;
    double sxn0 = (highest.second - tb0 / u_hi) * u_hi /
                  (coeff * highest.first * highest.first);
    if (!(sxn0 > 0.0)) sxn0 = tb0 / (coeff * u_hi * u_hi);

    const CurveModel m = [&p, g_s](double gv, std::span<const double> par) {
        const CoolingGains gains{gv, g_s};
        const MembraneParams pm{p.mass, p.omega_m, p.gamma_m, par[0]};
        const DetectionParams dm{par[1]};
        return std::log(model::final_temperature_combined(pm, dm, gains));
    };
    LsqOptions opts;
    opts.lower = {0.0, 0.0};
    FitResult fit =
        least_squares(m, data, {"t_bath", "s_xn_eff"}, {tb0, sxn0}, opts);

    const double tb = fit.params.at("t_bath");
    const double sxn = fit.params.at("s_xn_eff");
    if (sxn > 0.0 && tb > 0.0) {
        const double us = 1.0 + g_s;
        const double g_opt = -us + std::sqrt(us * us + tb / (coeff * sxn));
        fit.params["g_opt"] = g_opt;
        fit.params["t_min"] = model::final_temperature_combined(
            {p.mass, p.omega_m, p.gamma_m, tb}, {sxn}, {g_opt, g_s});
        double gv_min = points.front().first, gv_max = points.front().first;
        for (const auto& pt : points) {
            gv_min = std::min(gv_min, pt.first);
            gv_max = std::max(gv_max, pt.first);
        }
        if (g_opt < gv_min || g_opt > gv_max)
            fit.flags.push_back("minimum-extrapolated");
    } else {
        fit.flags.push_back("no-interior-minimum");
    }
    return fit;
}

FitResult fit_sympathetic_resonance(
    const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 5) throw std::invalid_argument("need at least 5 points");

    std::size_t i_pk = 0;
    for (std::size_t i = 1; i < points.size(); ++i)
        if (points[i].second > points[i_pk].second) i_pk = i;
    const double wa_pk = points[i_pk].first;
    const double rate_pk = points[i_pk].second;
    if (!(rate_pk > 0.0)) throw std::invalid_argument("no positive rates to fit");

    // half-width from the half-maximum crossings around the peak
    double w_left = wa_pk, w_right = wa_pk;
    for (std::size_t i = i_pk; i-- > 0;)
        if (points[i].second < 0.5 * rate_pk) {
            w_left = points[i].first;
            break;
        }
    for (std::size_t i = i_pk + 1; i < points.size(); ++i)
        if (points[i].second < 0.5 * rate_pk) {
            w_right = points[i].first;
            break;
        }
    double gamma0 = w_right - w_left;
    if (!(gamma0 > 0.0)) gamma0 = 0.2 * wa_pk;
    const double wm0 = wa_pk * 0.95;  // true resonance sits below the rate peak
    const double det0 = wa_pk - wm0;
    const double s0 = std::sqrt(rate_pk * (det0 * det0 + 0.25 * gamma0 * gamma0) /
                                (gamma0 * wa_pk * wa_pk * wa_pk));

    CurveData data;
    double max_rate = rate_pk;
    for (const auto& [wa, rate] : points) {
        data.x.push_back(wa);
        data.y.push_back(rate);
        data.sigma.push_back(std::max(std::fabs(rate), 1e-3 * max_rate));
    }

    const CurveModel m = [](double wa, std::span<const double> par) {
        const double s = par[0], gamma_a = par[1], wm = par[2];
        const double det = wa - wm;
        const double g_n2 = s * s * wa * wa * wa;
        return g_n2 * gamma_a / (det * det + 0.25 * gamma_a * gamma_a);
    };
    LsqOptions opts;
    opts.lower = {0.0, 1e-12, 0.0};
    FitResult fit = least_squares(m, data, {"g_n_scale", "gamma_a", "omega_m"},
                                  {s0, gamma0, wm0}, opts);
    fit.params["gamma_a_over_omega_m"] =
        fit.params.at("gamma_a") / fit.params.at("omega_m");
    return fit;
}

FitResult estimate_linewidth(const Spectrum& s) {
    if (s.freq.size() < 8) throw std::invalid_argument("spectrum too small");

    std::size_t i_pk = 0;
    for (std::size_t i = 1; i < s.psd.size(); ++i)
        if (s.psd[i] > s.psd[i_pk]) i_pk = i;

    std::vector<double> sorted = s.psd;
    std::sort(sorted.begin(), sorted.end());
    const double floor0 = std::max(sorted[sorted.size() / 4], 0.0);
    const double height0 = s.psd[i_pk] - floor0;

    FitResult fit;
    if (!(height0 > std::max(floor0, 1e-300))) {
        fit.flags.push_back("no-peak");
        fit.params = {{"f0", s.freq[i_pk]},
                      {"fwhm", 0.0},
                      {"height", height0},
                      {"floor", floor0}};
        return fit;
    }

    const double half = floor0 + 0.5 * height0;
    double f_left = s.freq.front(), f_right = s.freq.back();
    for (std::size_t i = i_pk; i-- > 0;)
        if (s.psd[i] < half) {
            f_left = s.freq[i];
            break;
        }
    for (std::size_t i = i_pk + 1; i < s.psd.size(); ++i)
        if (s.psd[i] < half) {
            f_right = s.freq[i];
            break;
        }
    double w0 = f_right - f_left;
    const double df = s.freq[1] - s.freq[0];
    if (!(w0 > 0.0)) w0 = 2.0 * df;

    CurveData data;
    for (std::size_t i = 0; i < s.freq.size(); ++i) {
        if (s.psd[i] > 0.0) {
            data.x.push_back(s.freq[i]);
            data.y.push_back(std::log(s.psd[i]));
        }
    }
    const CurveModel m = [](double f, std::span<const double> par) {
        const double f0 = par[0], w = par[1], h = par[2], c = par[3];
        const double det = 2.0 * (f - f0) / w;
        return std::log(h / (1.0 + det * det) + c);
    };
    LsqOptions opts;
    opts.lower = {s.freq.front(), 0.1 * df, 0.0, 0.0};
    opts.upper = {s.freq.back(), s.freq.back() - s.freq.front(),
                  std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity()};
    fit = least_squares(m, data, {"f0", "fwhm", "height", "floor"},
                        {s.freq[i_pk], w0, height0, std::max(floor0, 1e-12 * height0)},
                        opts);
    return fit;
}

}  // namespace optocool
