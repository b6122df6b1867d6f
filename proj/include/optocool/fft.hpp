#pragma once

#include <complex>
#include <vector>

namespace optocool {
namespace fft {

// Forward real-to-complex transform; returns n/2 + 1 bins.
std::vector<std::complex<double>> r2c(const std::vector<double>& in);

// In-place complex transform (forward: exp(-i w t) convention).
void c2c(std::vector<std::complex<double>>& data, bool inverse);

}  // namespace fft
}  // namespace optocool
