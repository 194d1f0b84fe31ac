// units.hpp — atomic-unit conversions used throughout the code base.
//
// Internally everything is in Hartree atomic units (energy in Hartree,
// time in hbar/Hartree). Interfaces accept cm^-1, fs and K.

#pragma once

namespace xdyn::units {

inline constexpr double hartree_cm = 219474.6313632;      // cm^-1 per Hartree
inline constexpr double fs_per_au  = 2.4188843265857e-2;  // fs per atomic time unit
inline constexpr double kb_au      = 3.166811563e-6;      // Hartree per Kelvin

inline constexpr double cm_to_au(double e_cm) { return e_cm / hartree_cm; }
inline constexpr double au_to_cm(double e_au) { return e_au * hartree_cm; }
inline constexpr double fs_to_au(double t_fs) { return t_fs / fs_per_au; }
inline constexpr double au_to_fs(double t_au) { return t_au * fs_per_au; }
inline constexpr double ps_to_au(double t_ps) { return fs_to_au(1e3 * t_ps); }

// inverse temperature in a.u.
inline constexpr double beta_au(double temperature_K) {
    return 1.0 / (kb_au * temperature_K);
}

}  // namespace xdyn::units
