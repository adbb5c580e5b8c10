#pragma once

#include <functional>

namespace regrisk {

struct QuadratureResult {
    double value = 0.0;
    double abs_error = 0.0;
    double l1_norm = 0.0;
    bool converged = false;
};

// Double-exponential (sinh-sinh) quadrature over the whole real line with
// refinement until the error estimate is at most abs_tol * max(1, L1).
QuadratureResult integrate_real_line(const std::function<double(double)>& f, double abs_tol);

}  // namespace regrisk
