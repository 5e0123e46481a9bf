// Small numerical helpers shared by the probes.
#pragma once

#include <vector>

namespace sww {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

// Least-squares line through (x, y).
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);
// Least-squares slope of log y against log x.
LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

// Real root of a polynomial with coefficients c[0] + c[1] x + ... bracketed in [a, b].
double bisect_poly(const std::vector<double>& c, double a, double b, double tol = 1e-15);

}  // namespace sww
