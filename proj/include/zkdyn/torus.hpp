#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "zkdyn/errors.hpp"

namespace zkdyn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Canonical representative in [0,1): wraps each coordinate mod 1.
inline double wrap_unit(double x) {
    double y = x - std::floor(x);
    // floor can leave exactly 1.0 for tiny negative x
    if (y >= 1.0) y -= 1.0;
    return y;
}

inline Vec wrap_torus(Vec x) {
    for (Eigen::Index r = 0; r < x.size(); ++r) x[r] = wrap_unit(x[r]);
    return x;
}

/// A point on T^d, coordinates kept in [0,1)^d.
class TorusPoint {
public:
    TorusPoint() = default;
    explicit TorusPoint(Vec coords) : coords_(wrap_torus(std::move(coords))) {}

    const Vec& coords() const { return coords_; }
    Eigen::Index dim() const { return coords_.size(); }
    double operator[](Eigen::Index r) const { return coords_[r]; }

private:
    Vec coords_;
};

/// Shortest distance on the flat torus (per-coordinate wrap, Euclidean norm).
inline double torus_distance(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (Eigen::Index r = 0; r < a.size(); ++r) {
        double dr = std::fabs(wrap_unit(a[r]) - wrap_unit(b[r]));
        dr = std::min(dr, 1.0 - dr);
        s += dr * dr;
    }
    return std::sqrt(s);
}

inline double torus_distance(const TorusPoint& a, const TorusPoint& b) {
    return torus_distance(a.coords(), b.coords());
}

/// Deterministic low-discrepancy sample of T^d (Kronecker sequence over
/// square roots of primes). Used for sampled commutation / invertibility
/// checks and as Monte-Carlo quadrature nodes.
inline std::vector<TorusPoint> sample_grid(Eigen::Index dim, int n_points) {
    static const double primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29,
                                    31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
    Vec alpha(dim);
    for (Eigen::Index r = 0; r < dim; ++r) {
        double s = std::sqrt(primes[r % 20]);
        alpha[r] = s - std::floor(s);
    }
    std::vector<TorusPoint> pts;
    pts.reserve(static_cast<size_t>(n_points));
    Vec x = Vec::Constant(dim, 0.5);
    for (int n = 0; n < n_points; ++n) {
        x = wrap_torus(x + alpha);
        pts.emplace_back(x);
    }
    return pts;
}

} // namespace zkdyn
