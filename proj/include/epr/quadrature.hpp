#pragma once

#include <cstddef>
#include <vector>

namespace epr {

// Composite Simpson weights for n (odd, >= 3) equally spaced nodes over
// an interval of length `length`.
std::vector<double> simpson_weights(int n, double length);

// Composite Simpson rule applied to samples on a uniform grid of spacing h.
// An even number of samples falls back to Simpson + one trapezoid panel.
double simpson(const std::vector<double>& y, double h);

// Uniform grid of n points from a to b inclusive.
std::vector<double> linspace(double a, double b, int n);

} // namespace epr
