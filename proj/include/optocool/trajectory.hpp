#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace optocool {

// Stage boundary inside a staged run (sample index where settings changed).
struct StageMark {
    std::size_t sample = 0;
    double gain_v = 0.0;
    double gamma_sym = 0.0;  // rad/s
};

// Uniformly sampled time series of a simulation run. x/v are the true state,
// y = x + x_n the measured signal; x_a/v_a present only for coupled runs.
struct Trajectory {
    double dt = 0.0;  // s
    std::vector<double> x;
    std::vector<double> v;
    std::vector<double> y;
    std::vector<double> x_a;
    std::vector<double> v_a;
    std::vector<StageMark> stages;

    std::size_t size() const { return x.size(); }
    bool has_atom_mode() const { return !x_a.empty(); }

    // columnar binary: magic, dt, per-series name + doubles
    void save_binary(const std::string& path) const;
    static Trajectory load_binary(const std::string& path);

    // fallback: t,x,v,y[,x_a,v_a] with provenance comment lines
    void save_csv(const std::string& path, const std::string& provenance) const;
};

}  // namespace optocool
