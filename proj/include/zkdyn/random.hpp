#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "zkdyn/spectrum.hpp"

namespace zkdyn {

/// Probability weights m_i over the k generators.
struct RandomModel {
    std::vector<double> weights;

    void validate() const {
        double s = 0.0;
        for (double w : weights) {
            if (w < 0) throw ValidationError("RandomModel: negative weight");
            s += w;
        }
        if (std::fabs(s - 1.0) > 1e-12)
            throw ValidationError("RandomModel: weights must sum to 1 (got " + std::to_string(s) + ")");
    }
};

/// Finite one-sided truncation of a sample sequence over the generators.
struct OmegaSample {
    std::vector<int> letters; // generator indices, 0-based
    std::uint64_t seed = 0;
    RandomModel model;
};

enum class EntropyMethod { pesin_formula, ruelle_bound, dimension_formula, matrix_oracle };

inline const char* to_string(EntropyMethod m) {
    switch (m) {
        case EntropyMethod::pesin_formula: return "pesin_formula";
        case EntropyMethod::ruelle_bound: return "ruelle_bound";
        case EntropyMethod::dimension_formula: return "dimension_formula";
        case EntropyMethod::matrix_oracle: return "matrix_oracle";
    }
    return "?";
}

struct EntropyEstimate {
    double value = 0.0;       // nats per iterate
    EntropyMethod method = EntropyMethod::pesin_formula;
    double stderr_ = 0.0;
    long samples = 1;
};

/// i.i.d. draws from the weights; deterministic per (seed, model, length).
/// Sampling is inverse-CDF over raw uniform doubles so the letter sequence
/// does not depend on a library distribution's implementation.
inline OmegaSample sample_omega(const RandomModel& model, long length, std::uint64_t seed) {
    model.validate();
    if (length < 1) throw ValidationError("sample_omega: length >= 1 required");
    std::mt19937_64 rng(seed);
    OmegaSample omega;
    omega.seed = seed;
    omega.model = model;
    omega.letters.reserve(static_cast<size_t>(length));
    const double denom = static_cast<double>(rng.max()) + 1.0;
    for (long t = 0; t < length; ++t) {
        double u = static_cast<double>(rng()) / denom;
        double acc = 0.0;
        int pick = static_cast<int>(model.weights.size()) - 1;
        for (size_t i = 0; i < model.weights.size(); ++i) {
            acc += model.weights[i];
            if (u < acc) {
                pick = static_cast<int>(i);
                break;
            }
        }
        omega.letters.push_back(pick);
    }
    return omega;
}

/// One fiber step of the skew product: x -> f_{omega_head}(x). Advancing
/// the sequence (the base shift) is the caller's job.
inline TorusPoint skew_step(const ZkAction& action, int omega_head, const TorusPoint& x) {
    return action.apply({omega_head, +1}, x);
}

struct RandomExponents {
    std::vector<std::vector<double>> per_omega; // n_omegas rows, d rates each
    std::vector<double> mean;
    std::vector<double> cross_omega_stddev;
};

/// Estimates random Lyapunov exponents for n_omegas independent sample
/// sequences (seeds cfg.seed, cfg.seed+1, ...). The cross-omega standard
/// deviation is the non-randomness diagnostic.
inline RandomExponents random_exponents(const ZkAction& action, const RandomModel& model,
                                        const TorusPoint& x0, const EstimatorConfig& cfg,
                                        long n_omegas) {
    cfg.validate();
    if (n_omegas < 1) throw ValidationError("random_exponents: n_omegas >= 1");
    const size_t d = static_cast<size_t>(action.dim());
    RandomExponents out;
    out.mean.assign(d, 0.0);
    out.cross_omega_stddev.assign(d, 0.0);
    for (long w = 0; w < n_omegas; ++w) {
        OmegaSample omega = sample_omega(model, cfg.n_steps, cfg.seed + static_cast<std::uint64_t>(w));
        size_t pos = 0;
        auto stream = [&]() { return Letter{omega.letters[pos++], +1}; };
        out.per_omega.push_back(qr_exponents(action, stream, x0, cfg));
    }
    for (const auto& row : out.per_omega)
        for (size_t j = 0; j < d; ++j) out.mean[j] += row[j];
    for (size_t j = 0; j < d; ++j) out.mean[j] /= static_cast<double>(n_omegas);
    if (n_omegas > 1) {
        for (const auto& row : out.per_omega)
            for (size_t j = 0; j < d; ++j) {
                double dj = row[j] - out.mean[j];
                out.cross_omega_stddev[j] += dj * dj;
            }
        for (size_t j = 0; j < d; ++j)
            out.cross_omega_stddev[j] = std::sqrt(out.cross_omega_stddev[j] / static_cast<double>(n_omegas - 1));
    }
    return out;
}

/// Pesin-formula evaluator for random entropy:
///   sum_j d_j * max(0, sum_i m_i lambda_{i,j})
/// (the closed form of the max-over-subsets expression).
inline EntropyEstimate random_entropy_pesin(const LyapunovSpectrum& spectrum,
                                            const RandomModel& model) {
    model.validate();
    double h = 0.0;
    for (const auto& b : spectrum.blocks) {
        double rate = 0.0;
        for (size_t i = 0; i < b.rates.size(); ++i) rate += model.weights[i] * b.rates[i];
        h += b.multiplicity * std::max(0.0, rate);
    }
    return {h, EntropyMethod::pesin_formula, 0.0, 1};
}

/// Ruelle inequality check: measured entropy must not exceed the
/// positive-exponent bound (allowing 3 sigma of the measurement).
inline bool random_entropy_ruelle_check(const LyapunovSpectrum& spectrum, const RandomModel& model,
                                        const EntropyEstimate& measured) {
    return measured.value <= random_entropy_pesin(spectrum, model).value + 3.0 * measured.stderr_;
}

/// Dimension-formula evaluator; gamma values are caller-supplied per block.
inline EntropyEstimate random_entropy_dimension(const LyapunovSpectrum& spectrum,
                                                const RandomModel& model,
                                                const std::vector<double>& gammas) {
    model.validate();
    if (gammas.size() != spectrum.blocks.size())
        throw GammaOutOfRange("need one gamma per block");
    double h = 0.0;
    for (size_t j = 0; j < spectrum.blocks.size(); ++j) {
        const auto& b = spectrum.blocks[j];
        if (gammas[j] < 0.0 || gammas[j] > b.multiplicity)
            throw GammaOutOfRange("gamma_j must lie in [0, d_j]");
        double rate = 0.0;
        for (size_t i = 0; i < b.rates.size(); ++i) rate += model.weights[i] * b.rates[i];
        h += gammas[j] * std::max(0.0, rate);
    }
    return {h, EntropyMethod::dimension_formula, 0.0, 1};
}

/// Monte-Carlo average of the Pesin evaluator over low-discrepancy initial
/// points (the mu-integral; Lebesgue plays the SRB role for the shipped
/// toral models).
inline EntropyEstimate random_entropy_pesin_mc(const ZkAction& action, const RandomModel& model,
                                               const EstimatorConfig& cfg, int sample_points = 16) {
    if (sample_points < 1) throw ValidationError("sample_points >= 1");
    auto pts = sample_grid(action.dim(), sample_points);
    std::vector<double> vals;
    vals.reserve(pts.size());
    for (const auto& x0 : pts)
        vals.push_back(random_entropy_pesin(generator_spectrum(action, x0, cfg), model).value);
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    double se = vals.size() > 1 ? std::sqrt(var / static_cast<double>(vals.size() - 1) /
                                            static_cast<double>(vals.size()))
                                : 0.0;
    return {mean, EntropyMethod::pesin_formula, se, static_cast<long>(vals.size())};
}

} // namespace zkdyn
