#include "epr/quadrature.hpp"

#include <stdexcept>

namespace epr {

std::vector<double> simpson_weights(int n, double length) {
    if (n < 3 || n % 2 == 0) throw std::invalid_argument("simpson_weights: n must be odd and >= 3");
    const double h = length / (n - 1);
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) w[i] = (i == 0 || i == n - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    for (double& x : w) x *= h / 3.0;
    return w;
}

double simpson(const std::vector<double>& y, double h) {
    const std::size_t n = y.size();
    if (n < 2) return 0.0;
    if (n == 2) return 0.5 * h * (y[0] + y[1]);
    std::size_t m = (n % 2 == 1) ? n : n - 1;
    double s = y[0] + y[m - 1];
    for (std::size_t i = 1; i + 1 < m; ++i) s += (i % 2 ? 4.0 : 2.0) * y[i];
    s *= h / 3.0;
    if (m != n) s += 0.5 * h * (y[n - 2] + y[n - 1]);
    return s;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    if (n == 1) {
        v[0] = a;
        return v;
    }
    const double h = (b - a) / (n - 1);
    for (int i = 0; i < n; ++i) v[i] = a + h * i;
    v[n - 1] = b;
    return v;
}

} // namespace epr
