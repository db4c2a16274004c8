#pragma once

#include <cmath>
#include <cstdlib>
#include <doctest.h>
#include <string>

#include "htem/error.hpp"

namespace testing {

inline double rel_diff(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

// Agreement to `digits` significant digits (or both tiny in absolute terms).
inline bool same_digits(double a, double b, int digits, double abs_floor = 1e-300) {
  if (std::abs(a - b) <= abs_floor) return true;
  return rel_diff(a, b) <= 0.5 * std::pow(10.0, 1 - digits);
}

template <class F>
htem::ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const htem::Error& e) {
    return e.code();
  }
  FAIL("expected an htem::Error");
  return htem::ErrorCode::Domain;
}

struct ThreadsGuard {
  explicit ThreadsGuard(int n) {
    if (const char* old = std::getenv("HTEM_THREADS")) saved = old, had = true;
    setenv("HTEM_THREADS", std::to_string(n).c_str(), 1);
  }
  ~ThreadsGuard() {
    if (had) setenv("HTEM_THREADS", saved.c_str(), 1);
    else unsetenv("HTEM_THREADS");
  }
  std::string saved;
  bool had = false;
};

}  // namespace testing
