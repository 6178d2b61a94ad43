#pragma once

#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "benchpress/behavior.hpp"
#include "benchpress/error.hpp"

namespace testing_support {

inline void expect_code(benchpress::ErrorCode code, const std::function<void()>& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << benchpress::to_string(code);
  } catch (const benchpress::Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

/// A [0, 1] logistic curve that passes through (w, p).
inline benchpress::SuccessCurve curve_through(double w, double p, double scale = 5.0) {
  return {w - scale * std::log(1.0 / p - 1.0), scale, 1.0, 0.0};
}

/// A curve that is exactly `level` (0 or 1) everywhere on a sane weight range.
inline benchpress::SuccessCurve constant_curve(bool one) {
  return one ? benchpress::SuccessCurve{1e6, 1.0, 1.0, 0.0}
             : benchpress::SuccessCurve{-1e6, 1.0, 1.0, 0.0};
}

}  // namespace testing_support
