#include "optocool/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>

namespace optocool {
namespace fft {

// FFTW planning is not thread-safe and plans are cached per size, so all
// transforms go through one mutex. The FFT work per call is small compared
// to the simulations feeding it; contention has not been a bottleneck.
namespace {

std::mutex g_mutex;

struct R2cPlan {
    fftw_plan plan = nullptr;
    double* in = nullptr;
    fftw_complex* out = nullptr;
    std::size_t n = 0;

    ~R2cPlan() {
        if (plan) fftw_destroy_plan(plan);
        if (in) fftw_free(in);
        if (out) fftw_free(out);
    }
};

struct C2cPlan {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    fftw_complex* buf = nullptr;
    std::size_t n = 0;

    ~C2cPlan() {
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        if (buf) fftw_free(buf);
    }
};

R2cPlan& r2c_plan(std::size_t n) {
    static std::map<std::size_t, R2cPlan> cache;
    auto& entry = cache[n];
    if (!entry.plan) {
        entry.n = n;
        entry.in = static_cast<double*>(fftw_malloc(sizeof(double) * n));
        entry.out = static_cast<fftw_complex*>(
            fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
        entry.plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), entry.in, entry.out,
                                          FFTW_ESTIMATE);
        if (!entry.plan) throw std::runtime_error("fftw r2c planning failed");
    }
    return entry;
}

C2cPlan& c2c_plan(std::size_t n) {
    static std::map<std::size_t, C2cPlan> cache;
    auto& entry = cache[n];
    if (!entry.fwd) {
        entry.n = n;
        entry.buf =
            static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
        entry.fwd = fftw_plan_dft_1d(static_cast<int>(n), entry.buf, entry.buf,
                                     FFTW_FORWARD, FFTW_ESTIMATE);
        entry.bwd = fftw_plan_dft_1d(static_cast<int>(n), entry.buf, entry.buf,
                                     FFTW_BACKWARD, FFTW_ESTIMATE);
        if (!entry.fwd || !entry.bwd) throw std::runtime_error("fftw c2c planning failed");
    }
    return entry;
}

}  // namespace

std::vector<std::complex<double>> r2c(const std::vector<double>& in) {
    if (in.empty()) throw std::invalid_argument("fft input is empty");
    std::lock_guard<std::mutex> lock(g_mutex);
    R2cPlan& p = r2c_plan(in.size());
    std::memcpy(p.in, in.data(), sizeof(double) * in.size());
    fftw_execute(p.plan);
    std::vector<std::complex<double>> out(in.size() / 2 + 1);
    std::memcpy(out.data(), p.out, sizeof(fftw_complex) * out.size());
    return out;
}

void c2c(std::vector<std::complex<double>>& data, bool inverse) {
    if (data.empty()) throw std::invalid_argument("fft input is empty");
    std::lock_guard<std::mutex> lock(g_mutex);
    C2cPlan& p = c2c_plan(data.size());
    std::memcpy(p.buf, data.data(), sizeof(fftw_complex) * data.size());
    fftw_execute(inverse ? p.bwd : p.fwd);
    std::memcpy(data.data(), p.buf, sizeof(fftw_complex) * data.size());
    if (inverse) {
        const double scale = 1.0 / static_cast<double>(data.size());
        for (auto& z : data) z *= scale;
    }
}

}  // namespace fft
}  // namespace optocool
