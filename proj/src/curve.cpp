#include "thiele/curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "thiele/errors.hpp"

namespace thiele {

PiecewiseCurve PiecewiseCurve::step(std::vector<double> breakpoints,
                                    std::vector<double> values) {
    std::vector<std::vector<double>> coeffs;
    coeffs.reserve(values.size());
    for (double v : values) coeffs.push_back({v});
    return polynomial(std::move(breakpoints), std::move(coeffs));
}

PiecewiseCurve PiecewiseCurve::polynomial(std::vector<double> breakpoints,
                                          std::vector<std::vector<double>> coeffs) {
    if (breakpoints.empty() || breakpoints.size() != coeffs.size())
        throw ValidationError("curve: breakpoints and values must be non-empty and equal length");
    if (!std::is_sorted(breakpoints.begin(), breakpoints.end()))
        throw ValidationError("curve: breakpoints must be sorted");
    for (std::size_t k = 1; k < breakpoints.size(); ++k)
        if (breakpoints[k] == breakpoints[k - 1])
            throw ValidationError("curve: breakpoints must be strictly increasing");
    for (const auto& c : coeffs) {
        if (c.empty())
            throw ValidationError("curve: empty coefficient row");
        for (double x : c)
            if (!std::isfinite(x))
                throw ValidationError("curve: non-finite coefficient");
    }
    PiecewiseCurve out;
    out.breakpoints_ = std::move(breakpoints);
    out.coeffs_ = std::move(coeffs);
    return out;
}

PiecewiseCurve PiecewiseCurve::constant(double value) {
    return step({0.0}, {value});
}

std::size_t PiecewiseCurve::piece_index(double t) const {
    // Largest k with breakpoints_[k] <= t; size() means "before first piece".
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
    if (it == breakpoints_.begin()) return breakpoints_.size();
    return static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
}

double PiecewiseCurve::eval_piece(std::size_t k, double t) const {
    const auto& c = coeffs_[k];
    const double x = t - breakpoints_[k];
    double v = 0.0;
    for (std::size_t m = c.size(); m-- > 0;) v = v * x + c[m];
    return v;
}

double PiecewiseCurve::operator()(double t) const {
    const std::size_t k = piece_index(t);
    if (k == breakpoints_.size()) return 0.0;
    return eval_piece(k, t);
}

double PiecewiseCurve::integrate_piece(std::size_t k, double a, double b) const {
    const auto& c = coeffs_[k];
    const double xa = a - breakpoints_[k];
    const double xb = b - breakpoints_[k];
    double va = 0.0, vb = 0.0;
    for (std::size_t m = c.size(); m-- > 0;) {
        va = va * xa + c[m] / static_cast<double>(m + 1);
        vb = vb * xb + c[m] / static_cast<double>(m + 1);
    }
    return vb * xb - va * xa;
}

double PiecewiseCurve::integrate(double a, double b) const {
    if (b < a) throw UsageError("curve: integrate requires a <= b");
    if (breakpoints_.empty() || a == b) return 0.0;
    a = std::max(a, breakpoints_.front());
    if (b <= a) return 0.0;
    double total = 0.0;
    std::size_t k = piece_index(a);
    double lo = a;
    while (lo < b) {
        const double hi = (k + 1 < breakpoints_.size()) ? std::min(b, breakpoints_[k + 1]) : b;
        total += integrate_piece(k, lo, hi);
        lo = hi;
        ++k;
    }
    return total;
}

double PiecewiseCurve::max_abs() const {
    // Exact for constants; for higher-degree pieces this samples piece ends,
    // which is all the validator needs as a boundedness surrogate.
    double m = 0.0;
    for (std::size_t k = 0; k < breakpoints_.size(); ++k) {
        m = std::max(m, std::abs(eval_piece(k, breakpoints_[k])));
        if (k + 1 < breakpoints_.size())
            m = std::max(m, std::abs(eval_piece(k, breakpoints_[k + 1])));
    }
    return m;
}

} // namespace thiele
