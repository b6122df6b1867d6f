#include "optocool/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "optocool/constants.hpp"
#include "optocool/fft.hpp"

namespace optocool {

namespace {

std::vector<double> hann_window(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 * (1.0 - std::cos(k_two_pi * static_cast<double>(i) /
                                     static_cast<double>(n)));
    return w;
}

// Hamming-windowed sinc low-pass, unit DC gain. cutoff/transition in Hz at
// the given sample rate.
std::vector<double> windowed_sinc_lowpass(double sample_rate, double cutoff,
                                          double transition) {
    std::size_t taps =
        static_cast<std::size_t>(std::ceil(3.3 * sample_rate / transition));
    taps |= 1;  // odd length, linear phase
    if (taps < 11) taps = 11;
    std::vector<double> h(taps);
    const double fc = cutoff / sample_rate;  // normalized
    const std::ptrdiff_t mid = static_cast<std::ptrdiff_t>(taps / 2);
    for (std::size_t i = 0; i < taps; ++i) {
        const double k = static_cast<double>(static_cast<std::ptrdiff_t>(i) - mid);
        const double sinc =
            k == 0.0 ? 2.0 * fc : std::sin(k_two_pi * fc * k) / (k_pi * k);
        const double win =
            0.54 - 0.46 * std::cos(k_two_pi * static_cast<double>(i) /
                                   static_cast<double>(taps - 1));
        h[i] = sinc * win;
    }
    const double sum = std::accumulate(h.begin(), h.end(), 0.0);
    for (double& v : h) v /= sum;
    return h;
}

std::complex<double> fir_response(const std::vector<double>& h, double f_over_fs) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t j = 0; j < h.size(); ++j)
        acc += h[j] * std::exp(std::complex<double>(
                          0.0, -k_two_pi * f_over_fs * static_cast<double>(j)));
    return acc;
}

void write_provenance(std::ofstream& os, const std::vector<std::string>& lines) {
    for (const auto& line : lines) os << "# " << line << "\n";
}

}  // namespace

void Spectrum::save_csv(const std::string& path,
                        const std::vector<std::string>& provenance) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os.precision(12);
    write_provenance(os, provenance);
    os << "# resolution_bw_hz " << resolution_bw << "\n";
    os << "# n_averages " << n_averages << "\n";
    os << "freq_hz,psd_m2_per_hz\n";
    for (std::size_t i = 0; i < freq.size(); ++i)
        os << freq[i] << ',' << psd[i] << '\n';
}

void ZeroSpanTrace::save_csv(const std::string& path,
                             const std::vector<std::string>& provenance) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os.precision(12);
    write_provenance(os, provenance);
    os << "# center_freq_hz " << center_freq << "\n";
    os << "# bandwidth_hz " << bandwidth << "\n";
    os << "t_s,temperature_k\n";
    for (std::size_t i = 0; i < t.size(); ++i)
        os << t[i] << ',' << temperature[i] << '\n';
}

WelchAccumulator::WelchAccumulator(double sample_rate, std::size_t segment_len,
                                   double overlap_frac, Window window) {
    if (!(sample_rate > 0.0)) throw std::invalid_argument("sample_rate must be > 0");
    if (segment_len < 16) throw std::invalid_argument("segment_len must be >= 16");
    if (!(overlap_frac >= 0.0 && overlap_frac <= 0.9))
        throw std::invalid_argument("overlap_frac must be in [0, 0.9]");
    (void)window;  // hann only
    sample_rate_ = sample_rate;
    segment_len_ = segment_len;
    hop_ = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::llround(static_cast<double>(segment_len) * (1.0 - overlap_frac))));
    window_ = hann_window(segment_len);
    window_power_ = std::inner_product(window_.begin(), window_.end(), window_.begin(), 0.0);
    window_sum_ = std::accumulate(window_.begin(), window_.end(), 0.0);
    buf_.resize(segment_len);
    acc_.assign(segment_len / 2 + 1, 0.0);
}

void WelchAccumulator::add(double sample) {
    buf_[fill_++] = sample;
    if (fill_ == segment_len_) {
        process_segment();
        std::memmove(buf_.data(), buf_.data() + hop_,
                     (segment_len_ - hop_) * sizeof(double));
        fill_ = segment_len_ - hop_;
    }
}

void WelchAccumulator::add(std::span<const double> samples) {
    for (double s : samples) add(s);
}

void WelchAccumulator::process_segment() {
    const double mean =
        std::accumulate(buf_.begin(), buf_.end(), 0.0) / static_cast<double>(segment_len_);
    std::vector<double> seg(segment_len_);
    for (std::size_t i = 0; i < segment_len_; ++i)
        seg[i] = (buf_[i] - mean) * window_[i];
    const auto spec = fft::r2c(seg);
    for (std::size_t i = 0; i < acc_.size(); ++i) acc_[i] += std::norm(spec[i]);
    ++n_segments_;
}

Spectrum WelchAccumulator::finalize() const {
    if (n_segments_ == 0) throw std::invalid_argument("series too short for one segment");
    Spectrum out;
    out.n_averages = n_segments_;
    out.resolution_bw = sample_rate_ * window_power_ / (window_sum_ * window_sum_);
    const double scale =
        1.0 / (sample_rate_ * window_power_ * static_cast<double>(n_segments_));
    const std::size_t n_bins = acc_.size();
    out.freq.resize(n_bins);
    out.psd.resize(n_bins);
    for (std::size_t i = 0; i < n_bins; ++i) {
        out.freq[i] = static_cast<double>(i) * sample_rate_ /
                      static_cast<double>(segment_len_);
        double p = acc_[i] * scale;
        const bool interior = i != 0 && !(segment_len_ % 2 == 0 && i == n_bins - 1);
        if (interior) p *= 2.0;
        out.psd[i] = p;
    }
    return out;
}

Spectrum welch_psd(std::span<const double> series, double sample_rate,
                   std::size_t segment_len, double overlap_frac, Window window) {
    if (series.size() < segment_len)
        throw std::invalid_argument("series too short for one segment");
    WelchAccumulator acc(sample_rate, segment_len, overlap_frac, window);
    acc.add(series);
    return acc.finalize();
}

namespace {

// Welch on a complex baseband; two-sided output sorted ascending in
// frequency, no detrend (the carrier bin is signal here).
struct ComplexWelch {
    std::vector<double> freq;  // Hz relative to baseband zero
    std::vector<double> psd;   // two-sided density
    std::size_t n_averages = 0;
    double enbw = 0.0;
};

ComplexWelch welch_complex(const std::vector<std::complex<double>>& series,
                           double sample_rate, std::size_t segment_len,
                           double overlap_frac) {
    if (series.size() < segment_len)
        throw std::invalid_argument("span too small for series length");
    const auto window = hann_window(segment_len);
    const double u =
        std::inner_product(window.begin(), window.end(), window.begin(), 0.0);
    const double ws = std::accumulate(window.begin(), window.end(), 0.0);
    const std::size_t hop = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(
               static_cast<double>(segment_len) * (1.0 - overlap_frac))));

    std::vector<double> acc(segment_len, 0.0);
    std::vector<std::complex<double>> seg(segment_len);
    std::size_t k = 0;
    for (std::size_t start = 0; start + segment_len <= series.size(); start += hop) {
        for (std::size_t i = 0; i < segment_len; ++i)
            seg[i] = series[start + i] * window[i];
        fft::c2c(seg, false);
        for (std::size_t i = 0; i < segment_len; ++i) acc[i] += std::norm(seg[i]);
        ++k;
    }

    ComplexWelch out;
    out.n_averages = k;
    out.enbw = sample_rate * u / (ws * ws);
    out.freq.resize(segment_len);
    out.psd.resize(segment_len);
    const double scale = 1.0 / (sample_rate * u * static_cast<double>(k));
    // unwrap to ascending order: negative frequencies first
    const std::size_t n_neg = segment_len / 2;
    for (std::size_t i = 0; i < segment_len; ++i) {
        const std::size_t src = (i + segment_len - n_neg) % segment_len;
        const double f_idx = static_cast<double>(i) - static_cast<double>(n_neg);
        out.freq[i] = f_idx * sample_rate / static_cast<double>(segment_len);
        out.psd[i] = acc[src] * scale;
    }
    return out;
}

}  // namespace

Spectrum zoom_psd(std::span<const double> series, double sample_rate, double f_center,
                  double span, double resolution_bw) {
    if (!(span > 0.0)) throw std::invalid_argument("span must be > 0");
    if (!(resolution_bw > 0.0)) throw std::invalid_argument("resolution_bw must be > 0");
    if (!(f_center - span / 2.0 > 0.0 && f_center + span / 2.0 < sample_rate / 2.0))
        throw std::invalid_argument("zoom band must lie inside (0, nyquist)");

    const std::size_t decim =
        std::max<std::size_t>(1, static_cast<std::size_t>(sample_rate / (2.5 * span)));
    const double fs_d = sample_rate / static_cast<double>(decim);

    // protect the +-span/2 band from aliasing after decimation: passband to
    // span/2, stopband from fs_d - span/2, cutoff centered between them
    const double transition = fs_d - span;
    const auto h = windowed_sinc_lowpass(sample_rate, fs_d / 2.0, transition);

    // mix to baseband and filter only at the decimated output points
    const double w0 = k_two_pi * f_center / sample_rate;
    std::vector<std::complex<double>> base;
    if (series.size() > h.size()) base.reserve((series.size() - h.size()) / decim + 1);
    for (std::size_t n = h.size() - 1; n < series.size(); n += decim) {
        std::complex<double> acc(0.0, 0.0);
        for (std::size_t j = 0; j < h.size(); ++j) {
            const std::size_t idx = n - j;
            const double phase = -w0 * static_cast<double>(idx);
            acc += h[j] * series[idx] *
                   std::complex<double>(std::cos(phase), std::sin(phase));
        }
        base.push_back(acc);
    }

    std::size_t seg_len =
        static_cast<std::size_t>(std::llround(1.5 * fs_d / resolution_bw));
    if (seg_len < 16) seg_len = 16;
    const ComplexWelch bw = welch_complex(base, fs_d, seg_len, 0.5);

    Spectrum out;
    out.n_averages = bw.n_averages;
    out.resolution_bw = bw.enbw;
    for (std::size_t i = 0; i < bw.freq.size(); ++i) {
        const double fb = bw.freq[i];
        if (std::fabs(fb) > span / 2.0) continue;
        const double gain2 = std::norm(fir_response(h, fb / sample_rate));
        out.freq.push_back(f_center + fb);
        // x2: one-sided density of the original real signal
        out.psd.push_back(2.0 * bw.psd[i] / gain2);
    }
    return out;
}

ZeroSpanTrace zero_span_trace(std::span<const double> series, double sample_rate,
                              double f_center, double bandwidth, double time_resolution,
                              const MembraneParams& p, const ZeroSpanOptions& opts) {
    p.validate();
    if (!(bandwidth > 0.0)) throw std::invalid_argument("bandwidth must be > 0");
    if (!(f_center - bandwidth / 2.0 > 0.0 &&
          f_center + bandwidth / 2.0 < sample_rate / 2.0))
        throw std::invalid_argument("band must lie inside (0, nyquist)");
    if (!(time_resolution >= 2.0 / bandwidth))
        throw std::invalid_argument("time_resolution shorter than 2/bandwidth");

    const auto h = windowed_sinc_lowpass(sample_rate, bandwidth / 2.0, bandwidth / 2.0);
    const std::size_t decim = std::max<std::size_t>(
        1, static_cast<std::size_t>(sample_rate / (8.0 * bandwidth)));
    const double fs_d = sample_rate / static_cast<double>(decim);

    // white-noise band power transmitted by the chain (for optional subtraction)
    const double h2 = std::inner_product(h.begin(), h.end(), h.begin(), 0.0);
    const double noise_var = opts.subtract_noise_floor
                                 ? opts.s_xn * sample_rate * h2
                                 : 0.0;

    const double w0 = k_two_pi * f_center / sample_rate;
    const std::size_t bin_samples = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(time_resolution * fs_d)));

    ZeroSpanTrace out;
    out.center_freq = f_center;
    out.bandwidth = bandwidth;

    double acc = 0.0;
    std::size_t in_bin = 0, bin_index = 0;
    for (std::size_t n = h.size() - 1; n < series.size(); n += decim) {
        std::complex<double> z(0.0, 0.0);
        for (std::size_t j = 0; j < h.size(); ++j) {
            const std::size_t idx = n - j;
            const double phase = -w0 * static_cast<double>(idx);
            z += h[j] * series[idx] *
                 std::complex<double>(std::cos(phase), std::sin(phase));
        }
        acc += 2.0 * std::norm(z);  // band-limited <x^2> per sample
        if (++in_bin == bin_samples) {
            const double var_band =
                std::max(0.0, acc / static_cast<double>(bin_samples) - noise_var);
            out.temperature.push_back(p.mass * p.omega_m * p.omega_m * var_band /
                                      k_boltzmann);
            out.t.push_back((static_cast<double>(bin_index) + 0.5) *
                            static_cast<double>(bin_samples) / fs_d);
            acc = 0.0;
            in_bin = 0;
            ++bin_index;
        }
    }
    if (out.t.empty())
        throw std::invalid_argument("series too short for one time bin");
    return out;
}

double band_power(const Spectrum& s, double f_lo, double f_hi) {
    if (s.freq.size() < 2) throw std::invalid_argument("spectrum too small");
    if (!(f_lo <= f_hi)) throw std::invalid_argument("empty band");
    if (f_lo < s.freq.front() || f_hi > s.freq.back())
        throw std::invalid_argument("band outside spectrum grid");
    if (f_lo == f_hi) return 0.0;

    auto interp = [&s](double f) {
        const auto it = std::lower_bound(s.freq.begin(), s.freq.end(), f);
        if (it == s.freq.begin()) return s.psd.front();
        const std::size_t i = static_cast<std::size_t>(it - s.freq.begin());
        if (i >= s.freq.size()) return s.psd.back();
        const double f0 = s.freq[i - 1], f1 = s.freq[i];
        const double w = (f - f0) / (f1 - f0);
        return (1.0 - w) * s.psd[i - 1] + w * s.psd[i];
    };

    double total = 0.0;
    double f_prev = f_lo, p_prev = interp(f_lo);
    for (std::size_t i = 0; i < s.freq.size(); ++i) {
        if (s.freq[i] <= f_lo) continue;
        if (s.freq[i] >= f_hi) break;
        total += 0.5 * (p_prev + s.psd[i]) * (s.freq[i] - f_prev);
        f_prev = s.freq[i];
        p_prev = s.psd[i];
    }
    total += 0.5 * (p_prev + interp(f_hi)) * (f_hi - f_prev);
    return total;
}

}  // namespace optocool
