#pragma once

#include <vector>

namespace thiele {

// Piecewise-polynomial function of time.
//
// On [breakpoint[k], breakpoint[k+1]) the value is the polynomial
// sum_m coeffs[k][m] * (t - breakpoint[k])^m; the last piece extends to
// +infinity and the value is 0 before the first breakpoint.  Evaluation is
// right-continuous, so a value at a breakpoint is the value of the piece
// that starts there.  Integrals are exact (piecewise antiderivatives).
class PiecewiseCurve {
public:
    PiecewiseCurve() = default;

    // Piecewise constant: values[k] on [breakpoints[k], breakpoints[k+1]).
    static PiecewiseCurve step(std::vector<double> breakpoints,
                               std::vector<double> values);

    // General piecewise polynomial, one coefficient row per piece.
    static PiecewiseCurve polynomial(std::vector<double> breakpoints,
                                     std::vector<std::vector<double>> coeffs);

    static PiecewiseCurve constant(double value);

    double operator()(double t) const;

    // Exact integral over [a, b] (a <= b required).
    double integrate(double a, double b) const;

    double max_abs() const;   // sup |value| over all pieces evaluated on piece ends
    bool empty() const { return breakpoints_.empty(); }

    const std::vector<double>& breakpoints() const { return breakpoints_; }

private:
    std::size_t piece_index(double t) const;
    double eval_piece(std::size_t k, double t) const;
    double integrate_piece(std::size_t k, double a, double b) const;

    std::vector<double> breakpoints_;
    std::vector<std::vector<double>> coeffs_;
};

} // namespace thiele
