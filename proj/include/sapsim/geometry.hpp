#pragma once

#include <stdexcept>

namespace sapsim {

// Reference-cell and stem geometry (SI units).
struct CellGeometry {
    double delta = 4.33e-5;   // side length of reference cell [m]
    double gamma = 7.88e-6;   // radius of the artificial boundary Gamma [m]
    double R_f = 3.5e-6;      // fiber radius [m]
    double W = 4.38e-6;       // fiber/vessel wall thickness [m]
    double L_f = 1.0e-3;      // fiber length [m]
    double L_v = 5.0e-4;      // vessel length [m]
    double N_f = 16.0;        // fibers per vessel [-]
    double R_tree = 0.25;     // stem radius [m]

    double hole_ratio() const { return gamma / delta; }

    void validate() const {
        if (!(delta > 0 && gamma >= 0 && R_f > 0 && W >= 0 && L_f > 0 && L_v > 0 &&
              N_f > 0 && R_tree > 0))
            throw std::invalid_argument("geometry: all lengths must be positive");
        if (!(gamma < 0.5 * delta))
            throw std::invalid_argument("geometry: gamma must be < delta/2");
    }
};

} // namespace sapsim
