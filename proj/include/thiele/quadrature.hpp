#pragma once

#include <functional>
#include <vector>

namespace thiele {

// Adaptive trapezoid integration of f over [a, b] to relative tolerance
// rtol (with a small absolute floor).  Intervals are bisected until the
// two-panel refinement agrees with the single panel.
double adaptive_trapezoid(const std::function<double(double)>& f, double a, double b,
                          double rtol);

// Same, but the interval is first split at the given knots (discontinuity
// locations of f); knots outside (a, b) are ignored.
double adaptive_trapezoid(const std::function<double(double)>& f, double a, double b,
                          double rtol, const std::vector<double>& knots);

} // namespace thiele
