#pragma once

#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace r2d {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad arguments or violated preconditions (step-size constraint, invalid split, ...).
struct ValueError : Error {
    using Error::Error;
};

// Non-finite values produced during evaluation (divergence, NaN losses).
struct EvalError : Error {
    using Error::Error;
};

// File parsing / format / fingerprint mismatches.
struct IoError : Error {
    using Error::Error;
};

// Inner solver hit its iteration cap before reaching tolerance.
struct ConvergenceError : Error {
    using Error::Error;
};

inline std::string strprintf(const char* fmt, ...) {
    va_list args;
    va_start(args, fmt);
    va_list args2;
    va_copy(args2, args);
    const int len = std::vsnprintf(nullptr, 0, fmt, args);
    va_end(args);
    std::string out(static_cast<std::size_t>(len), '\0');
    std::vsnprintf(out.data(), out.size() + 1, fmt, args2);
    va_end(args2);
    return out;
}

// All floating-point output goes through this: 17 significant digits round-trips
// a 64-bit real exactly.
inline std::string fmt_g17(double x) {
    return strprintf("%.17g", x);
}

}  // namespace r2d
