#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "r2d/common.hpp"

namespace r2d {

// Model weights theta. Dense, 64-bit, dimension fixed by usage.
using ParamVector = std::vector<double>;

inline bool all_finite(const ParamVector& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

inline void require_finite(const ParamVector& v, const char* what) {
    if (!all_finite(v)) throw EvalError(strprintf("%s contains a non-finite entry", what));
}

inline double dot(const ParamVector& a, const ParamVector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double squared_norm(const ParamVector& v) { return dot(v, v); }

inline double norm(const ParamVector& v) { return std::sqrt(squared_norm(v)); }

inline double distance(const ParamVector& a, const ParamVector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

// y += a * x
inline void axpy(double a, const ParamVector& x, ParamVector& y) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

inline ParamVector add_scaled(const ParamVector& x, double a, const ParamVector& g) {
    ParamVector out(x);
    axpy(a, g, out);
    return out;
}

inline void fill_zero(ParamVector& v) {
    for (double& x : v) x = 0.0;
}

inline void scale(ParamVector& v, double a) {
    for (double& x : v) x *= a;
}

}  // namespace r2d
