#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "nsch/errors.hpp"

namespace nsch {

// Double-well potential psi(s) = (s^2 - 1)^2 / 4, minima at s = +-1.

inline double psi(double s) {
    const double q = s * s - 1.0;
    return 0.25 * q * q;
}

inline double psi_prime(double s) { return (s * s - 1.0) * s; }

/// psi''(s) = 3 s^2 - 1, bounded below by -1.
inline double psi_double_prime(double s) { return 3.0 * s * s - 1.0; }

/// Linear-in-s viscosity blend, clamped to the pure phases, so that
/// 0 < min(nu1, nu2) <= nu(s) <= max(nu1, nu2) for every real s and
/// |nu(a) - nu(b)| <= |nu1 - nu2| / 2 * |a - b|.
struct ViscosityLaw {
    double nu1 = 1.0;  // phase s = +1
    double nu2 = 1.0;  // phase s = -1

    ViscosityLaw() = default;
    ViscosityLaw(double nu1_, double nu2_) : nu1(nu1_), nu2(nu2_) {
        if (!(nu1 > 0.0) || !(nu2 > 0.0))
            throw contract_error("ViscosityLaw: viscosities must be strictly positive (got " +
                                 std::to_string(nu1) + ", " + std::to_string(nu2) + ")");
    }

    double nu_star() const { return std::min(nu1, nu2); }
    double nu_upper() const { return std::max(nu1, nu2); }
};

inline double viscosity(const ViscosityLaw& law, double s) {
    const double c = std::clamp(s, -1.0, 1.0);
    return law.nu1 * 0.5 * (1.0 + c) + law.nu2 * 0.5 * (1.0 - c);
}

}  // namespace nsch
