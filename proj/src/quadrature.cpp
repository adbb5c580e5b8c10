#include "regrisk/quadrature.hpp"

#include <boost/math/quadrature/sinh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace regrisk {

QuadratureResult integrate_real_line(const std::function<double(double)>& f, double abs_tol) {
    // The target is abs_tol for integrands with L1 norm up to 1 and abs_tol * L1
    // beyond that; an absolute 1e-10 on an integral of size 1e3 is below
    // double resolution.
    thread_local boost::math::quadrature::sinh_sinh<double> integrator(12);
    constexpr double kFloor = 4 * std::numeric_limits<double>::epsilon();

    QuadratureResult r;
    double rel = std::max(abs_tol, kFloor);
    for (int pass = 0; pass < 3; ++pass) {
        double err = 0.0, l1 = 0.0, v = 0.0;
        try {
            v = integrator.integrate(f, rel, &err, &l1);
        } catch (const std::exception&) {
            // Boost rejects NaN integrand values (e.g. inf * 0 far in a heavy tail).
            r.converged = false;
            return r;
        }
        r.value = v;
        r.abs_error = err;
        r.l1_norm = l1;
        if (!std::isfinite(v) || !std::isfinite(err)) {
            r.converged = false;
            return r;
        }
        const double target = abs_tol * std::max(1.0, l1);
        if (err <= target) {
            r.converged = true;
            return r;
        }
        const double next = std::max(target / std::max(l1, 1.0) / 4, kFloor);
        if (next >= rel) break;
        rel = next;
    }
    r.converged = false;
    return r;
}

}  // namespace regrisk
