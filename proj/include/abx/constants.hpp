#pragma once

#include "abx/errors.hpp"

namespace abx {

// Physical constants entering the minimal coupling (-i*hbar*d/dx - (e/c)A)^2/2m + eV.
// Natural units hbar = e = c = m = 1 are the default; every routine that needs a
// dimensional factor takes a Constants so SI-style overrides stay possible.
struct Constants {
    double hbar = 1.0;
    double mass = 1.0;
    double charge = 1.0;       // e
    double light_speed = 1.0;  // c

    // coupling in front of the line integral of A: alpha = (e/hbar c) \oint A.dx
    double flux_coupling() const { return charge / (hbar * light_speed); }
    // coupling in front of the time integral of V: (e/hbar) \int V dt
    double electric_coupling() const { return charge / hbar; }

    void validate() const {
        if (!(hbar > 0.0 && mass > 0.0 && charge > 0.0 && light_speed > 0.0))
            throw config_error("constants must all be strictly positive");
    }
};

} // namespace abx
