#pragma once

namespace dispeq::constants {

// CODATA 2018 exact/recommended values, SI.
inline constexpr double c0      = 299792458.0;          // m/s
inline constexpr double e_charge = 1.602176634e-19;     // C
inline constexpr double hbar    = 1.054571817e-34;      // J s
inline constexpr double k_B     = 1.380649e-23;         // J/K
inline constexpr double eta0    = 376.730313668;        // Ohm, free-space wave impedance
inline constexpr double eV      = 1.602176634e-19;      // J

inline constexpr double pi = 3.141592653589793238462643383279502884;

inline constexpr const char* version = "codata2018.v1";

} // namespace dispeq::constants
