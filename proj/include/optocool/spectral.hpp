#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "optocool/params.hpp"

namespace optocool {

// One-sided power spectral density on a uniform frequency grid.
struct Spectrum {
    std::vector<double> freq;  // Hz, strictly increasing
    std::vector<double> psd;   // m^2/Hz (or V^2/Hz before calibration)
    std::size_t n_averages = 0;
    double resolution_bw = 0.0;  // Hz (equivalent noise bandwidth)

    void save_csv(const std::string& path,
                  const std::vector<std::string>& provenance = {}) const;
};

// Band power around a fixed center frequency versus time, in kelvin.
struct ZeroSpanTrace {
    std::vector<double> t;            // s, bin centers
    std::vector<double> temperature;  // K
    double center_freq = 0.0;         // Hz
    double bandwidth = 0.0;           // Hz

    void save_csv(const std::string& path,
                  const std::vector<std::string>& provenance = {}) const;
};

enum class Window { hann };

// Streaming Welch estimator; feed samples one at a time, then finalize.
// Density-calibrated one-sided output (tone power is recovered by band
// integration, not peak reading).
class WelchAccumulator {
public:
    WelchAccumulator(double sample_rate, std::size_t segment_len, double overlap_frac,
                     Window window = Window::hann);

    void add(double sample);
    void add(std::span<const double> samples);
    std::size_t n_segments() const { return n_segments_; }
    Spectrum finalize() const;  // throws if no complete segment was seen

private:
    void process_segment();

    double sample_rate_;
    std::size_t segment_len_;
    std::size_t hop_;
    std::vector<double> window_;
    double window_power_;  // sum w^2
    double window_sum_;    // sum w
    std::vector<double> buf_;
    std::size_t fill_ = 0;
    std::vector<double> acc_;
    std::size_t n_segments_ = 0;
};

Spectrum welch_psd(std::span<const double> series, double sample_rate,
                   std::size_t segment_len, double overlap_frac,
                   Window window = Window::hann);

// Narrow-band PSD by complex heterodyne at f_center, low-pass, decimate,
// Welch on the baseband; agrees with welch_psd on shared bands.
Spectrum zoom_psd(std::span<const double> series, double sample_rate, double f_center,
                  double span, double resolution_bw);

struct ZeroSpanOptions {
    bool subtract_noise_floor = false;
    double s_xn = 0.0;  // m^2/Hz, used only when subtracting
};

// Band-pass envelope power around f_center converted to mode temperature via
// T = m omega_m^2 <x^2>_band / k_B.
ZeroSpanTrace zero_span_trace(std::span<const double> series, double sample_rate,
                              double f_center, double bandwidth, double time_resolution,
                              const MembraneParams& p, const ZeroSpanOptions& opts = {});

// Trapezoidal integral of the PSD over [f_lo, f_hi] (fractional bins
// interpolated linearly).
double band_power(const Spectrum& s, double f_lo, double f_hi);

}  // namespace optocool
