#pragma once

#include <Eigen/Dense>
#include <cstdlib>
#include <functional>
#include <utility>
#include <vector>

#include "zkdyn/errors.hpp"
#include "zkdyn/torus.hpp"

namespace zkdyn {

using LatticeVector = Eigen::VectorXi;

/// One letter of a composition word: generator index (0-based) and a sign
/// selecting the generator itself (+1) or its inverse (-1).
struct Letter {
    int gen = 0;
    int sign = +1;
};

/// Finite composition word; letters are applied first-letter-first.
using SignedWord = std::vector<Letter>;

/// A single generator: the map, its inverse, and both tangent maps.
/// Tangent maps return the full d x d Jacobian at the base point.
struct MapDescriptor {
    std::function<Vec(const Vec&)> forward;
    std::function<Vec(const Vec&)> inverse;
    std::function<Mat(const Vec&)> d_forward;
    std::function<Mat(const Vec&)> d_inverse;
};

/// A Z^k-action on T^d: k commuting invertible maps with tangent maps.
/// Immutable after construction; safe for concurrent reads.
class ZkAction {
public:
    ZkAction(std::vector<MapDescriptor> generators, Eigen::Index dim, double tol)
        : gens_(std::move(generators)), dim_(dim), tol_(tol) {}

    int rank() const { return static_cast<int>(gens_.size()); }
    Eigen::Index dim() const { return dim_; }
    double commutation_tolerance() const { return tol_; }
    const MapDescriptor& generator(int i) const { return gens_[static_cast<size_t>(i)]; }

    TorusPoint apply(const Letter& l, const TorusPoint& x) const {
        const auto& g = gens_[static_cast<size_t>(l.gen)];
        return TorusPoint(l.sign >= 0 ? g.forward(x.coords()) : g.inverse(x.coords()));
    }

    /// Jacobian of the (possibly inverted) generator at x.
    Mat tangent(const Letter& l, const TorusPoint& x) const {
        const auto& g = gens_[static_cast<size_t>(l.gen)];
        return l.sign >= 0 ? g.d_forward(x.coords()) : g.d_inverse(x.coords());
    }

private:
    std::vector<MapDescriptor> gens_;
    Eigen::Index dim_;
    double tol_;
};

/// Validates commutation and invertibility on a deterministic sample grid.
/// Throws CommutationViolation / NotInvertible.
inline ZkAction make_action(std::vector<MapDescriptor> descriptors, Eigen::Index dim,
                            double tol, int grid_points = 128) {
    if (descriptors.empty() || dim < 1)
        throw ValidationError("make_action: need k >= 1 generators and d >= 1");
    ZkAction action(std::move(descriptors), dim, tol);
    const auto grid = sample_grid(dim, grid_points);
    const int k = action.rank();
    for (int i = 0; i < k; ++i) {
        for (const auto& x : grid) {
            TorusPoint fx = action.apply({i, +1}, x);
            TorusPoint back = action.apply({i, -1}, fx);
            if (torus_distance(back, x) > tol)
                throw NotInvertible("generator " + std::to_string(i + 1) +
                                    ": forward∘inverse deviates from identity");
        }
        for (int j = i + 1; j < k; ++j) {
            double worst = 0.0;
            for (const auto& x : grid) {
                TorusPoint a = action.apply({i, +1}, action.apply({j, +1}, x));
                TorusPoint b = action.apply({j, +1}, action.apply({i, +1}, x));
                worst = std::max(worst, torus_distance(a, b));
            }
            if (worst > tol)
                throw CommutationViolation("generators " + std::to_string(i + 1) + "," +
                                           std::to_string(j + 1) + " do not commute (max dist " +
                                           std::to_string(worst) + ")");
        }
    }
    return action;
}

inline TorusPoint apply_word(const ZkAction& action, const SignedWord& w, TorusPoint x) {
    for (const Letter& l : w) x = action.apply(l, x);
    return x;
}

/// Canonical word for the lattice power T^n: f_1^{n_1}, then f_2^{n_2}, ...
inline SignedWord lattice_word(const LatticeVector& n) {
    SignedWord w;
    for (Eigen::Index i = 0; i < n.size(); ++i) {
        int s = n[i] >= 0 ? +1 : -1;
        for (int c = 0; c < std::abs(n[i]); ++c) w.push_back({static_cast<int>(i), s});
    }
    return w;
}

inline TorusPoint apply_lattice(const ZkAction& action, const LatticeVector& n,
                                const TorusPoint& x, int max_word_length = 1000000) {
    if (n.size() != action.rank())
        throw ValidationError("apply_lattice: lattice vector length != rank");
    for (Eigen::Index i = 0; i < n.size(); ++i)
        if (std::abs(n[i]) > max_word_length)
            throw WordTooLong("apply_lattice: |n_i| exceeds max word length");
    return apply_word(action, lattice_word(n), x);
}

inline Vec tangent_apply(const ZkAction& action, const Letter& l, const TorusPoint& x,
                         const Vec& u) {
    return action.tangent(l, x) * u;
}

} // namespace zkdyn
