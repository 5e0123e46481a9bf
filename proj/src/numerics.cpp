#include "sww/numerics.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <stdexcept>

namespace sww {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need >= 2 points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    LineFit f;
    f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    f.intercept = (sy - f.slope * sx) / n;
    return f;
}

LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y)
{
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    return fit_line(lx, ly);
}

double bisect_poly(const std::vector<double>& c, double a, double b, double tol)
{
    auto p = [&c](double x) {
        double acc = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
        return acc;
    };
    boost::math::tools::eps_tolerance<double> stop(52);
    boost::uintmax_t iters = 200;
    auto r = boost::math::tools::bisect(p, a, b, [tol, &stop](double lo, double hi) {
        return stop(lo, hi) || std::abs(hi - lo) < tol;
    }, iters);
    return 0.5 * (r.first + r.second);
}

}  // namespace sww
