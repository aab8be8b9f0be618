#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <vector>

namespace reflecta {

/// All lattice arithmetic is exact.  Entries can grow large during
/// elimination even when inputs are small, so the working integer type is
/// arbitrary precision throughout.
using Int = boost::multiprecision::cpp_int;

using Vec = std::vector<Int>;
using Mat = std::vector<Vec>;

inline Vec vec_zero(int dim) { return Vec(static_cast<std::size_t>(dim)); }

inline Vec vec_add(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Vec vec_sub(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vec vec_neg(const Vec& a) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = -a[i];
    return r;
}

inline Vec vec_scale(const Vec& a, const Int& c) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
    return r;
}

inline bool vec_is_zero(const Vec& a) {
    for (const Int& x : a)
        if (x != 0) return false;
    return true;
}

/// Floor division with positive divisor; used to reduce entries into a
/// half-open interval during normalization.
inline Int floor_div(const Int& a, const Int& b) {
    Int q = a / b;
    if (a % b != 0 && a < 0) --q;
    return q;
}

std::string vec_to_string(const Vec& v);
std::string mat_to_string(const Mat& m);

}  // namespace reflecta
