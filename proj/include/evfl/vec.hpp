#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "evfl/errors.hpp"

namespace evfl {

using Vec = std::vector<double>;

inline void require_same_dim(const Vec& a, const Vec& b, const char* what) {
    if (a.size() != b.size()) {
        throw ShapeError(std::string(what) + ": dimension mismatch (" +
                         std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    }
}

inline double dot(const Vec& a, const Vec& b) {
    require_same_dim(a, b, "dot");
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double norm(const Vec& a) {
    return std::sqrt(std::inner_product(a.begin(), a.end(), a.begin(), 0.0));
}

/// dst += s * src
inline void add_scaled(Vec& dst, const Vec& src, double s) {
    require_same_dim(dst, src, "add_scaled");
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += s * src[i];
}

inline bool all_finite(const Vec& a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

/// Shortest round-trip decimal text for a double (std::to_chars).
std::string format_double(double v);

} // namespace evfl
