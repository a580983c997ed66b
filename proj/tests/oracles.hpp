#pragma once

// Test-side reference computations, written independently of the library's
// quadrature and transport code.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

/// Composite Simpson on [a, b] with 2n panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  const double h = (b - a) / (2.0 * n);
  double s = f(a) + f(b);
  for (int i = 1; i < 2 * n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

/// Integral over the real line through x = tan(u).
inline double simpson_line(const std::function<double(double)>& f, int n = 20000) {
  const double e = 1e-12;
  return simpson(
      [&](double u) {
        const double c = std::cos(u);
        return f(std::tan(u)) / (c * c);
      },
      -std::numbers::pi / 2 + e, std::numbers::pi / 2 - e, n);
}

/// Minimum over all permutations of sum_i C[i][sigma(i)] / n.
inline double brute_force_assignment(const std::vector<std::vector<double>>& C) {
  const std::size_t n = C.size();
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  double best = 1e300;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += C[i][p[i]];
    best = std::min(best, s);
  } while (std::next_permutation(p.begin(), p.end()));
  return best / static_cast<double>(n);
}

/// splitmix64, used by the property generators.
struct Gen {
  unsigned long long s;
  explicit Gen(unsigned long long seed) : s(seed) {}
  unsigned long long next() {
    unsigned long long z = (s += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform(double lo = 0.0, double hi = 1.0) { return lo + (hi - lo) * ((next() >> 11) * 0x1.0p-53); }
  int integer(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<unsigned long long>(hi - lo + 1)); }
};

}  // namespace oracle
