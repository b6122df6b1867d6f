#pragma once

namespace optocool {

// CODATA 2018 / SI 2019 exact values
inline constexpr double k_hbar = 1.054571817e-34;  // J s
inline constexpr double k_boltzmann = 1.380649e-23;  // J/K
inline constexpr double k_pi = 3.141592653589793238462643383279502884;
inline constexpr double k_two_pi = 2.0 * k_pi;

// Hz -> rad/s at the I/O boundary; everything internal is angular.
inline constexpr double hz_to_rad(double f_hz) { return k_two_pi * f_hz; }
inline constexpr double rad_to_hz(double w) { return w / k_two_pi; }

}  // namespace optocool
