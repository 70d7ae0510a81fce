#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <vector>

#include "zkdyn/random.hpp"
#include "zkdyn/spectrum.hpp"

namespace zkdyn {

/// A direction in R^k; unit() asserts |v| = 1 within 1e-12.
struct Direction {
    Vec v;

    static Direction unit(Vec raw) {
        double n = raw.norm();
        if (std::fabs(n - 1.0) > 1e-12)
            throw ValidationError("Direction::unit: |v| != 1");
        return {std::move(raw)};
    }
    static Direction normalized(const Vec& raw) {
        double n = raw.norm();
        if (n == 0.0) throw ValidationError("cannot normalize the zero vector");
        return {raw / n};
    }
};

/// Lattice approximation {m_n} of the ray through v, with increments.
struct DirectionalPath {
    std::vector<LatticeVector> targets;    // m_0 .. m_N
    std::vector<LatticeVector> increments; // m_n - m_{n-1}, n = 1..N
    Direction direction;
};

namespace detail {

// minimizer / smallest-norm / lexicographic cascade over candidate lattice
// points; distances compared with a small absolute tie tolerance
inline bool path_candidate_better(const LatticeVector& a, const LatticeVector& b,
                                  const Vec& target) {
    double da = (a.cast<double>() - target).squaredNorm();
    double db = (b.cast<double>() - target).squaredNorm();
    if (da < db - 1e-9) return true;
    if (da > db + 1e-9) return false;
    long na = a.cast<long>().squaredNorm();
    long nb = b.cast<long>().squaredNorm();
    if (na != nb) return na < nb;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return a[i] < b[i];
    return false;
}

} // namespace detail

/// Each m_n is the closest lattice point to n*v, ties broken by smallest
/// norm then lexicographically; searched over round(n*v) and its 3^k cube
/// of neighbors.
inline DirectionalPath lattice_path(const Direction& v, long N) {
    if (N < 1) throw ValidationError("lattice_path: N >= 1");
    const Eigen::Index k = v.v.size();
    DirectionalPath path;
    path.direction = v;
    path.targets.push_back(LatticeVector::Zero(k));
    for (long n = 1; n <= N; ++n) {
        Vec target = static_cast<double>(n) * v.v;
        LatticeVector center(k);
        for (Eigen::Index i = 0; i < k; ++i) center[i] = static_cast<int>(std::lround(target[i]));
        LatticeVector best = center;
        std::vector<int> offset(static_cast<size_t>(k), -1);
        while (true) {
            LatticeVector cand = center;
            for (Eigen::Index i = 0; i < k; ++i) cand[i] += offset[static_cast<size_t>(i)];
            if (detail::path_candidate_better(cand, best, target)) best = cand;
            Eigen::Index i = 0;
            while (i < k && ++offset[static_cast<size_t>(i)] > 1) offset[static_cast<size_t>(i++)] = -1;
            if (i == k) break;
        }
        path.increments.push_back(best - path.targets.back());
        path.targets.push_back(best);
    }
    return path;
}

/// Expands one increment (delta_1,...,delta_k) into letters, generator
/// index ascending; identity increments contribute nothing.
inline SignedWord increment_letters(const LatticeVector& delta) {
    return lattice_word(delta);
}

/// Flat letter stream of the whole path.
inline SignedWord directional_word_stream(const DirectionalPath& path) {
    SignedWord w;
    for (const auto& delta : path.increments) {
        SignedWord part = increment_letters(delta);
        w.insert(w.end(), part.begin(), part.end());
    }
    return w;
}

/// Directional Lyapunov exponents: QR estimation over the path's letter
/// stream, normalized by the path index n (not the letter count).
/// cfg.n_steps and cfg.burn_in count path steps. Sorted descending.
inline std::vector<double> directional_exponents(const ZkAction& action, const Direction& v,
                                                 const TorusPoint& x0, const EstimatorConfig& cfg) {
    cfg.validate();
    DirectionalPath path = lattice_path(v, cfg.n_steps);
    const Eigen::Index d = action.dim();
    Mat frame = Mat::Identity(d, d);
    Vec logsum = Vec::Zero(d);
    TorusPoint x = x0;
    for (long n = 1; n <= cfg.n_steps; ++n) {
        for (const Letter& l : increment_letters(path.increments[static_cast<size_t>(n - 1)])) {
            frame = action.tangent(l, x) * frame;
            if (!frame.allFinite()) throw NumericalBlowup("non-finite tangent frame");
            x = action.apply(l, x);
            Vec diag = detail::reorthonormalize(frame);
            if (n > cfg.burn_in) logsum += diag.array().log().matrix();
        }
    }
    std::vector<double> rates(static_cast<size_t>(d));
    for (Eigen::Index j = 0; j < d; ++j)
        rates[static_cast<size_t>(j)] = logsum[j] / static_cast<double>(cfg.n_steps - cfg.burn_in);
    std::sort(rates.begin(), rates.end(), std::greater<double>());
    return rates;
}

/// Pesin-formula directional entropy:
///   sum_j d_j * max(0, sum_i v_i lambda_{i,j}).
inline EntropyEstimate directional_entropy(const LyapunovSpectrum& spectrum, const Direction& v) {
    double h = 0.0;
    for (const auto& b : spectrum.blocks)
        h += b.multiplicity * std::max(0.0, LyapunovSpectrum::combined_rate(b, v.v));
    return {h, EntropyMethod::pesin_formula, 0.0, 1};
}

inline EntropyEstimate directional_entropy_dimension(const LyapunovSpectrum& spectrum,
                                                     const Direction& v,
                                                     const std::vector<double>& gammas) {
    if (gammas.size() != spectrum.blocks.size())
        throw GammaOutOfRange("need one gamma per block");
    double h = 0.0;
    for (size_t j = 0; j < spectrum.blocks.size(); ++j) {
        const auto& b = spectrum.blocks[j];
        if (gammas[j] < 0.0 || gammas[j] > b.multiplicity)
            throw GammaOutOfRange("gamma_j must lie in [0, d_j]");
        h += gammas[j] * std::max(0.0, LyapunovSpectrum::combined_rate(b, v.v));
    }
    return {h, EntropyMethod::dimension_formula, 0.0, 1};
}

/// First-octant reduction: generators with v_i < 0 are replaced by their
/// inverses and the direction by |v| componentwise, preserving
/// v_i lambda_{i,j} = v'_i lambda'_{i,j} per block.
inline std::pair<ZkAction, Direction> octant_reduce(const ZkAction& action, const Direction& v) {
    std::vector<MapDescriptor> gens;
    Vec vabs = v.v.cwiseAbs();
    for (int i = 0; i < action.rank(); ++i) {
        const MapDescriptor& g = action.generator(i);
        if (v.v[i] < 0)
            gens.push_back({g.inverse, g.forward, g.d_inverse, g.d_forward});
        else
            gens.push_back(g);
    }
    return {ZkAction(std::move(gens), action.dim(), action.commutation_tolerance()),
            Direction{vabs}};
}

namespace detail {

// best rational p/q approximating r with q <= max_den (continued fractions)
inline bool rationalize(double r, long max_den, long& p_out, long& q_out) {
    long p0 = 1, q0 = 0, p1 = static_cast<long>(std::floor(r)), q1 = 1;
    double x = r - std::floor(r);
    for (int it = 0; it < 64; ++it) {
        if (std::fabs(r - static_cast<double>(p1) / static_cast<double>(q1)) < 1e-9) break;
        if (x < 1e-15) break;
        x = 1.0 / x;
        long a = static_cast<long>(std::floor(x));
        x -= std::floor(x);
        long p2 = a * p1 + p0, q2 = a * q1 + q0;
        if (q2 > max_den) break;
        p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    }
    p_out = p1;
    q_out = q1;
    return std::fabs(r - static_cast<double>(p1) / static_cast<double>(q1)) < 1e-9;
}

inline long gcd_l(long a, long b) {
    a = std::labs(a); b = std::labs(b);
    while (b) { long t = a % b; a = b; b = t; }
    return a;
}

} // namespace detail

/// Primitive integer vector parallel to v (same orientation). Throws
/// NotRational when no rationalization with denominators <= max_den fits.
inline LatticeVector rationalize_direction(const Direction& v, long max_den = 1000000) {
    const Eigen::Index k = v.v.size();
    Eigen::Index ref = 0;
    for (Eigen::Index i = 1; i < k; ++i)
        if (std::fabs(v.v[i]) > std::fabs(v.v[ref])) ref = i;
    std::vector<long> p(static_cast<size_t>(k)), q(static_cast<size_t>(k), 1);
    for (Eigen::Index i = 0; i < k; ++i) {
        double r = v.v[i] / v.v[ref];
        if (!detail::rationalize(r, max_den, p[static_cast<size_t>(i)], q[static_cast<size_t>(i)]))
            throw NotRational("no small-denominator rationalization of direction component");
    }
    long L = 1;
    for (Eigen::Index i = 0; i < k; ++i) {
        long qi = q[static_cast<size_t>(i)];
        L = L / detail::gcd_l(L, qi) * qi;
    }
    std::vector<long> w(static_cast<size_t>(k));
    long g = 0;
    for (Eigen::Index i = 0; i < k; ++i) {
        w[static_cast<size_t>(i)] = p[static_cast<size_t>(i)] * (L / q[static_cast<size_t>(i)]);
        g = detail::gcd_l(g, w[static_cast<size_t>(i)]);
    }
    LatticeVector out(k);
    for (Eigen::Index i = 0; i < k; ++i) out[i] = static_cast<int>(w[static_cast<size_t>(i)] / g);
    if (out.cast<double>().dot(v.v) < 0) out = -out;
    double t = out.cast<double>().norm();
    if ((out.cast<double>() - t * v.v).cwiseAbs().maxCoeff() > 1e-6)
        throw NotRational("direction components are not rationally related");
    return out;
}

struct RationalCheck {
    EntropyEstimate lhs; // formula directional entropy at v
    EntropyEstimate rhs; // (1/t) * entropy of the single map T^{t v}
    double scale = 0.0;  // minimal positive real t with t*v integer
    LatticeVector integer_vector;
};

/// Cross-check of the rational-direction identity
///   h^v = (1/t) h(T^{t v}),   t v in Z^k minimal.
/// The rhs entropy is the positive-exponent sum of the composed word,
/// estimated by QR; an oracle callback (entropy of T^w, e.g. the matrix
/// eigenvalue oracle for linear models) replaces the estimate when given.
inline RationalCheck rational_check(
    const ZkAction& action, const LyapunovSpectrum& spectrum, const Direction& v,
    const TorusPoint& x0, const EstimatorConfig& cfg,
    const std::function<double(const LatticeVector&)>& oracle_entropy = nullptr) {
    LatticeVector w = rationalize_direction(v);
    const double t = w.cast<double>().norm();
    RationalCheck out;
    out.scale = t;
    out.integer_vector = w;
    out.lhs = directional_entropy(spectrum, v);
    if (oracle_entropy) {
        out.rhs = {oracle_entropy(w) / t, EntropyMethod::matrix_oracle, 0.0, 1};
    } else {
        SignedWord word = lattice_word(w);
        auto per_letter = qr_exponents(action, WordCycle(word), x0, cfg);
        double h = 0.0;
        for (double r : per_letter) h += std::max(0.0, r * static_cast<double>(word.size()));
        out.rhs = {h / t, EntropyMethod::pesin_formula, 0.0, 1};
    }
    return out;
}

/// Extension to all of R^k: h^0 = 0 and h^{v} = |v| h^{v/|v|}.
inline EntropyEstimate extend_to_rk(const LyapunovSpectrum& spectrum, const Vec& v_raw) {
    double n = v_raw.norm();
    if (n == 0.0) return {0.0, EntropyMethod::pesin_formula, 0.0, 1};
    EntropyEstimate h = directional_entropy(spectrum, Direction::normalized(v_raw));
    h.value *= n;
    return h;
}

struct SweepRow {
    double theta = 0.0;
    Vec v;
    double entropy_formula = 0.0;
    double entropy_from_estimated_rates = 0.0;
    double max_block_residual = 0.0;
    std::vector<double> estimated_rates;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double max_adjacent_difference = 0.0; // discrete modulus of continuity
    double max_discrepancy = 0.0;         // formula vs estimate
};

namespace detail {

// per-frame-vector formula rates (block rates repeated by multiplicity,
// sorted descending to match estimator output)
inline std::vector<double> expanded_formula_rates(const LyapunovSpectrum& spectrum, const Vec& v) {
    std::vector<double> rates;
    for (const auto& b : spectrum.blocks) {
        double r = LyapunovSpectrum::combined_rate(b, v);
        for (int c = 0; c < b.multiplicity; ++c) rates.push_back(r);
    }
    std::sort(rates.begin(), rates.end(), std::greater<double>());
    return rates;
}

inline SweepRow sweep_node(const ZkAction& action, const LyapunovSpectrum& spectrum,
                           const Direction& v, const TorusPoint& x0,
                           const EstimatorConfig& cfg) {
    SweepRow row;
    row.v = v.v;
    row.entropy_formula = directional_entropy(spectrum, v).value;
    row.estimated_rates = directional_exponents(action, v, x0, cfg);
    for (double r : row.estimated_rates)
        row.entropy_from_estimated_rates += std::max(0.0, r);
    auto formula = expanded_formula_rates(spectrum, v.v);
    for (size_t j = 0; j < formula.size(); ++j)
        row.max_block_residual =
            std::max(row.max_block_residual, std::fabs(formula[j] - row.estimated_rates[j]));
    return row;
}

} // namespace detail

/// Angular sweep (k = 2): v(theta) = (cos theta, sin theta) at
/// theta = 2 pi s / resolution.
inline SweepResult direction_sweep(const ZkAction& action, const LyapunovSpectrum& spectrum,
                                   int resolution, const TorusPoint& x0,
                                   const EstimatorConfig& cfg) {
    if (action.rank() != 2)
        throw ValidationError("direction_sweep: angular sweep needs k = 2 (supply directions explicitly otherwise)");
    if (resolution < 8) throw ValidationError("direction_sweep: resolution >= 8");
    SweepResult out;
    for (int s = 0; s < resolution; ++s) {
        double theta = 2.0 * M_PI * s / resolution;
        Vec v(2);
        v << std::cos(theta), std::sin(theta);
        Direction dir = Direction::normalized(v);
        SweepRow row = detail::sweep_node(action, spectrum, dir, x0, cfg);
        row.theta = theta;
        out.rows.push_back(std::move(row));
    }
    for (size_t s = 0; s < out.rows.size(); ++s) {
        const auto& cur = out.rows[s];
        const auto& nxt = out.rows[(s + 1) % out.rows.size()];
        out.max_adjacent_difference = std::max(
            out.max_adjacent_difference, std::fabs(nxt.entropy_formula - cur.entropy_formula));
        out.max_discrepancy =
            std::max(out.max_discrepancy,
                     std::fabs(cur.entropy_formula - cur.entropy_from_estimated_rates));
    }
    return out;
}

/// General-k sweep over a supplied direction list.
inline SweepResult direction_sweep(const ZkAction& action, const LyapunovSpectrum& spectrum,
                                   const std::vector<Direction>& directions, const TorusPoint& x0,
                                   const EstimatorConfig& cfg) {
    SweepResult out;
    for (size_t s = 0; s < directions.size(); ++s) {
        SweepRow row = detail::sweep_node(action, spectrum, directions[s], x0, cfg);
        row.theta = static_cast<double>(s);
        out.rows.push_back(std::move(row));
    }
    for (size_t s = 0; s + 1 < out.rows.size(); ++s)
        out.max_adjacent_difference =
            std::max(out.max_adjacent_difference,
                     std::fabs(out.rows[s + 1].entropy_formula - out.rows[s].entropy_formula));
    for (const auto& row : out.rows)
        out.max_discrepancy = std::max(
            out.max_discrepancy, std::fabs(row.entropy_formula - row.entropy_from_estimated_rates));
    return out;
}

} // namespace zkdyn
