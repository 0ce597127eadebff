#pragma once

// Brute-force Game-of-24 solver over all operation trees with hand-rolled
// fractions. Independent of boost::rational and of the library's domain.

#include <cstdint>
#include <numeric>
#include <vector>

namespace oracle {

struct Frac {
  std::int64_t n = 0;
  std::int64_t d = 1;

  static Frac make(std::int64_t n, std::int64_t d) {
    if (d < 0) {
      n = -n;
      d = -d;
    }
    const std::int64_t g = std::gcd(n < 0 ? -n : n, d);
    return {n / (g == 0 ? 1 : g), d / (g == 0 ? 1 : g)};
  }
  friend bool operator==(const Frac& a, const Frac& b) { return a.n == b.n && a.d == b.d; }
};

inline Frac add(Frac a, Frac b) { return Frac::make(a.n * b.d + b.n * a.d, a.d * b.d); }
inline Frac sub(Frac a, Frac b) { return Frac::make(a.n * b.d - b.n * a.d, a.d * b.d); }
inline Frac mul(Frac a, Frac b) { return Frac::make(a.n * b.n, a.d * b.d); }

/// True iff some binary operation tree over all of `xs` evaluates to `target`.
inline bool reaches(std::vector<Frac> xs, Frac target) {
  if (xs.size() == 1) return xs[0] == target;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < xs.size(); ++j) {
      if (i == j) continue;
      std::vector<Frac> rest;
      for (std::size_t k = 0; k < xs.size(); ++k) {
        if (k != i && k != j) rest.push_back(xs[k]);
      }
      const Frac a = xs[i], b = xs[j];
      std::vector<Frac> results{add(a, b), sub(a, b), mul(a, b)};
      if (b.n != 0) results.push_back(Frac::make(a.n * b.d, a.d * b.n));
      for (const Frac& r : results) {
        rest.push_back(r);
        if (reaches(rest, target)) return true;
        rest.pop_back();
      }
    }
  }
  return false;
}

inline bool solvable(const std::vector<int>& numbers, int target = 24) {
  std::vector<Frac> xs;
  for (int v : numbers) xs.push_back({v, 1});
  return reaches(xs, {target, 1});
}

}  // namespace oracle
