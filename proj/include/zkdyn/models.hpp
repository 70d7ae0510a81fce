#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "zkdyn/action.hpp"
#include "zkdyn/spectrum.hpp"

namespace zkdyn {

using MatI = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;

/// Unimodular integer matrix inducing a torus automorphism.
struct IntegerMatrix {
    MatI entries;

    Eigen::Index dim() const { return entries.rows(); }
    Mat as_double() const { return entries.cast<double>(); }

    /// Exact determinant (Bareiss fraction-free elimination in __int128).
    long long det() const {
        const Eigen::Index d = entries.rows();
        Eigen::Matrix<__int128, Eigen::Dynamic, Eigen::Dynamic> m =
            entries.cast<__int128>();
        __int128 prev = 1;
        int sign = 1;
        for (Eigen::Index p = 0; p < d - 1; ++p) {
            if (m(p, p) == 0) {
                Eigen::Index swap = -1;
                for (Eigen::Index r = p + 1; r < d; ++r)
                    if (m(r, p) != 0) { swap = r; break; }
                if (swap < 0) return 0;
                m.row(p).swap(m.row(swap));
                sign = -sign;
            }
            for (Eigen::Index r = p + 1; r < d; ++r)
                for (Eigen::Index c = p + 1; c < d; ++c)
                    m(r, c) = (m(r, c) * m(p, p) - m(r, p) * m(p, c)) / prev;
            prev = m(p, p);
        }
        return static_cast<long long>(sign * m(d - 1, d - 1));
    }

    bool unimodular() const {
        long long dt = det();
        return dt == 1 || dt == -1;
    }

    IntegerMatrix operator*(const IntegerMatrix& o) const {
        const Eigen::Index d = dim();
        IntegerMatrix r;
        r.entries = MatI::Zero(d, d);
        for (Eigen::Index a = 0; a < d; ++a)
            for (Eigen::Index b = 0; b < d; ++b) {
                __int128 s = 0;
                for (Eigen::Index c = 0; c < d; ++c)
                    s += static_cast<__int128>(entries(a, c)) * o.entries(c, b);
                if (s > INT64_MAX || s < INT64_MIN)
                    throw NumericalBlowup("integer matrix product overflows 64 bits");
                r.entries(a, b) = static_cast<long long>(s);
            }
        return r;
    }

    bool operator==(const IntegerMatrix& o) const { return entries == o.entries; }

    static IntegerMatrix identity(Eigen::Index d) {
        return {MatI::Identity(d, d)};
    }

    /// Exact integer inverse of a unimodular matrix.
    IntegerMatrix inverse() const {
        if (!unimodular()) throw NotUnimodular("inverse: |det| != 1");
        Mat invd = as_double().inverse();
        IntegerMatrix inv;
        inv.entries = MatI::Zero(dim(), dim());
        for (Eigen::Index a = 0; a < dim(); ++a)
            for (Eigen::Index b = 0; b < dim(); ++b)
                inv.entries(a, b) = std::llround(invd(a, b));
        if (!((*this * inv) == identity(dim())))
            throw NotUnimodular("inverse: rounding check failed");
        return inv;
    }

    IntegerMatrix pow(int n) const {
        IntegerMatrix base = n >= 0 ? *this : inverse();
        IntegerMatrix r = identity(dim());
        for (int c = 0; c < std::abs(n); ++c) r = r * base;
        return r;
    }
};

inline IntegerMatrix int_matrix(std::initializer_list<std::initializer_list<long long>> rows) {
    IntegerMatrix m;
    const Eigen::Index d = static_cast<Eigen::Index>(rows.size());
    m.entries = MatI::Zero(d, static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index a = 0;
    for (const auto& row : rows) {
        Eigen::Index b = 0;
        for (long long x : row) m.entries(a, b++) = x;
        ++a;
    }
    return m;
}

/// Linear Z^k-action x -> A_i x mod 1. Exact integer commutation and
/// unimodularity checks; tangent maps are the constant matrices.
inline ZkAction from_matrices(const std::vector<IntegerMatrix>& matrices) {
    if (matrices.empty()) throw ValidationError("from_matrices: need k >= 1 matrices");
    const Eigen::Index d = matrices[0].dim();
    for (const auto& A : matrices) {
        if (A.entries.rows() != d || A.entries.cols() != d)
            throw DimensionMismatch("from_matrices: matrices must all be d x d");
        if (!A.unimodular()) throw NotUnimodular("from_matrices: |det| != 1");
    }
    for (size_t i = 0; i < matrices.size(); ++i)
        for (size_t j = i + 1; j < matrices.size(); ++j)
            if (!(matrices[i] * matrices[j] == matrices[j] * matrices[i]))
                throw NotCommutingExact("matrices " + std::to_string(i + 1) + "," +
                                        std::to_string(j + 1) + " do not commute");
    std::vector<MapDescriptor> gens;
    for (const auto& A : matrices) {
        Mat fwd = A.as_double();
        Mat inv = A.inverse().as_double();
        gens.push_back({[fwd](const Vec& x) { return wrap_torus(fwd * x); },
                        [inv](const Vec& x) { return wrap_torus(inv * x); },
                        [fwd](const Vec&) { return fwd; },
                        [inv](const Vec&) { return inv; }});
    }
    return ZkAction(std::move(gens), d, 1e-9);
}

/// Spectrum with the exact flag (rates are eigenvalue log-moduli).
struct AnalyticSpectrum : LyapunovSpectrum {
    bool exact = true;
};

/// Joint spectrum of a commuting family from its joint eigenstructure:
/// eigenvectors of a generic integer combination B = sum c_i A_i carry the
/// eigenvalue of each A_i; conjugate pairs merge into real blocks.
inline AnalyticSpectrum analytic_spectrum(const std::vector<IntegerMatrix>& matrices) {
    const Eigen::Index d = matrices[0].dim();
    const int k = static_cast<int>(matrices.size());
    std::mt19937_64 rng(12345);
    std::uniform_int_distribution<int> coeff(1, 7);
    for (int attempt = 0; attempt < 5; ++attempt) {
        Mat B = Mat::Zero(d, d);
        for (const auto& A : matrices) B += coeff(rng) * A.as_double();
        Eigen::ComplexEigenSolver<Mat> es(B);
        if (es.info() != Eigen::Success) continue;
        std::vector<std::vector<double>> tuples;
        bool ok = true;
        for (Eigen::Index j = 0; j < d && ok; ++j) {
            Eigen::VectorXcd w = es.eigenvectors().col(j);
            Eigen::Index lead;
            w.cwiseAbs().maxCoeff(&lead);
            std::vector<double> rates(static_cast<size_t>(k));
            for (int i = 0; i < k; ++i) {
                Eigen::VectorXcd Aw = matrices[static_cast<size_t>(i)].as_double() * w;
                std::complex<double> mu = Aw[lead] / w[lead];
                if ((Aw - mu * w).norm() > 1e-8 * w.norm()) {
                    ok = false;
                    break;
                }
                rates[static_cast<size_t>(i)] = std::log(std::abs(mu));
            }
            if (ok) tuples.push_back(std::move(rates));
        }
        if (!ok) continue;
        GroupingResult grouped = group_exponents(tuples, 1e-8);
        AnalyticSpectrum spec;
        spec.blocks = std::move(grouped.blocks);
        spec.dim = d;
        spec.grouping_epsilon = 1e-8;
        spec.grouping_ambiguous = grouped.ambiguous;
        spec.exact = true;
        return spec;
    }
    throw NotSimultaneouslyDiagonalizable(
        "no generic combination separated joint eigenspaces; estimate the spectrum numerically instead");
}

/// Entropy of a single toral automorphism: sum of positive eigenvalue
/// log-moduli with algebraic multiplicity.
inline double matrix_entropy(const IntegerMatrix& B) {
    if (!B.unimodular()) throw NotUnimodular("matrix_entropy: |det| != 1");
    Eigen::ComplexEigenSolver<Mat> es(B.as_double(), false);
    double h = 0.0;
    for (Eigen::Index j = 0; j < B.dim(); ++j)
        h += std::max(0.0, std::log(std::abs(es.eigenvalues()[j])));
    return h;
}

/// Composed matrix A_1^{w_1} ... A_k^{w_k} for the lattice power T^w.
inline IntegerMatrix compose_lattice(const std::vector<IntegerMatrix>& matrices,
                                     const LatticeVector& w) {
    IntegerMatrix r = IntegerMatrix::identity(matrices[0].dim());
    for (Eigen::Index i = 0; i < w.size(); ++i)
        r = r * matrices[static_cast<size_t>(i)].pow(w[i]);
    return r;
}

/// Coordinatewise amplitudes of the conjugacy h(x)_r = x_r + eps_r sin(2 pi x_r)/(2 pi).
struct ConjugacyParams {
    Vec epsilon;

    void validate() const {
        for (Eigen::Index r = 0; r < epsilon.size(); ++r)
            if (std::fabs(epsilon[r]) >= 1.0)
                throw EpsilonTooLarge("|epsilon_r| < 1 required for h to be a diffeomorphism");
    }
};

namespace detail {

inline double conj_h1(double x, double eps) {
    return x + eps * std::sin(2.0 * M_PI * x) / (2.0 * M_PI);
}

// monotone scalar inverse of conj_h1, Newton with bisection fallback
inline double conj_h1_inv(double y, double eps) {
    double lo = y - std::fabs(eps) / (2.0 * M_PI), hi = y + std::fabs(eps) / (2.0 * M_PI);
    double x = y;
    for (int it = 0; it < 100; ++it) {
        double g = conj_h1(x, eps) - y;
        if (std::fabs(g) < 1e-14) break;
        if (g > 0) hi = x; else lo = x;
        double dg = 1.0 + eps * std::cos(2.0 * M_PI * x);
        double step = x - g / dg;
        x = (step > lo && step < hi) ? step : 0.5 * (lo + hi);
    }
    return x;
}

} // namespace detail

/// Smoothly conjugated action h∘f_i∘h^{-1} with exact chain-rule tangent
/// maps; h is coordinatewise so Dh stays diagonal.
inline ZkAction conjugate_action(const ZkAction& linear, const ConjugacyParams& params) {
    params.validate();
    const Eigen::Index d = linear.dim();
    const Vec eps = params.epsilon;
    auto h = [eps, d](Vec x) {
        for (Eigen::Index r = 0; r < d; ++r) x[r] = detail::conj_h1(x[r], eps[r]);
        return wrap_torus(std::move(x));
    };
    auto h_inv = [eps, d](Vec y) {
        for (Eigen::Index r = 0; r < d; ++r) y[r] = detail::conj_h1_inv(y[r], eps[r]);
        return wrap_torus(std::move(y));
    };
    auto dh_at = [eps, d](const Vec& x) {
        Vec diag(d);
        for (Eigen::Index r = 0; r < d; ++r)
            diag[r] = 1.0 + eps[r] * std::cos(2.0 * M_PI * x[r]);
        return diag;
    };
    std::vector<MapDescriptor> gens;
    for (int i = 0; i < linear.rank(); ++i) {
        const MapDescriptor base = linear.generator(i);
        auto conj_map = [h, h_inv](const std::function<Vec(const Vec&)>& f) {
            return [h, h_inv, f](const Vec& x) { return h(f(h_inv(x))); };
        };
        auto conj_tangent = [h_inv, dh_at](const std::function<Vec(const Vec&)>& f,
                                           const std::function<Mat(const Vec&)>& df) {
            return [h_inv, dh_at, f, df](const Vec& x) -> Mat {
                Vec z = h_inv(x);
                Mat jac = df(z);
                Vec left = dh_at(f(z));
                Vec right = dh_at(z);
                return left.asDiagonal() * jac * right.cwiseInverse().asDiagonal();
            };
        };
        gens.push_back({conj_map(base.forward), conj_map(base.inverse),
                        conj_tangent(base.forward, base.d_forward),
                        conj_tangent(base.inverse, base.d_inverse)});
    }
    return ZkAction(std::move(gens), d, linear.commutation_tolerance());
}

// ---- shipped model zoo ----

inline IntegerMatrix cat_matrix() { return int_matrix({{2, 1}, {1, 1}}); }

/// (A, A^2) with A the Arnold cat map.
inline std::vector<IntegerMatrix> cat_pair() { return {cat_matrix(), cat_matrix() * cat_matrix()}; }

/// (A, A^{-1}).
inline std::vector<IntegerMatrix> cat_inverse_pair() {
    return {cat_matrix(), cat_matrix().inverse()};
}

inline std::vector<IntegerMatrix> identity_pair(Eigen::Index d = 2) {
    return {IntegerMatrix::identity(d), IntegerMatrix::identity(d)};
}

/// log((3 + sqrt 5)/2), the top exponent of the cat map.
inline double cat_lambda() { return std::log((3.0 + std::sqrt(5.0)) / 2.0); }

} // namespace zkdyn
