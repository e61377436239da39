#include "thiele/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace thiele {

namespace {

double recurse(const std::function<double(double)>& f, double a, double b, double fa,
               double fb, double whole, double rtol, int depth) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double left = 0.5 * (m - a) * (fa + fm);
    const double right = 0.5 * (b - m) * (fm + fb);
    const double refined = left + right;
    const double err = refined - whole;
    if (depth <= 0 || std::abs(err) <= rtol * std::abs(refined) + 1e-300)
        return refined + err / 3.0;
    return recurse(f, a, m, fa, fm, left, rtol, depth - 1) +
           recurse(f, m, b, fm, fb, right, rtol, depth - 1);
}

} // namespace

double adaptive_trapezoid(const std::function<double(double)>& f, double a, double b,
                          double rtol) {
    if (!(b > a)) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double whole = 0.5 * (b - a) * (fa + fb);
    return recurse(f, a, b, fa, fb, whole, rtol, 48);
}

double adaptive_trapezoid(const std::function<double(double)>& f, double a, double b,
                          double rtol, const std::vector<double>& knots) {
    if (!(b > a)) return 0.0;
    double total = 0.0;
    double lo = a;
    for (double k : knots) {
        if (k <= lo) continue;
        if (k >= b) break;
        total += adaptive_trapezoid(f, lo, k, rtol);
        lo = k;
    }
    total += adaptive_trapezoid(f, lo, b, rtol);
    return total;
}

} // namespace thiele
