#include "fraclab/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace fraclab {

namespace {

// Gauss-Legendre on [-1, 1] by Newton iteration on P_n, then mapped to [0, 1].
QuadRule compute_rule(int n) {
    if (n < 1 || n > 128) throw std::invalid_argument("gauss_legendre: order out of range");
    QuadRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < n; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));  // Chebyshev initial guess
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            if (n == 1) p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double pn = (n == 1) ? x : p1;
            pp = n * (x * pn - p0) / (x * x - 1.0);
            double dx = pn / pp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        r.nodes[n - 1 - i] = 0.5 * (x + 1.0);
        r.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * pp * pp);
    }
    return r;
}

}  // namespace

const QuadRule& gauss_legendre(int n) {
    static std::mutex mu;
    static std::map<int, QuadRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
    return it->second;
}

}  // namespace fraclab
