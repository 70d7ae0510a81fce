#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "zkdyn/action.hpp"

namespace zkdyn {

struct EstimatorConfig {
    long n_steps = 100000;
    int reorth_period = 1;
    long burn_in = 1000;
    double grouping_epsilon = 0.05;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_steps <= burn_in || burn_in < 0)
            throw ValidationError("EstimatorConfig: need n_steps > burn_in >= 0");
        if (reorth_period < 1) throw ValidationError("EstimatorConfig: reorth_period >= 1");
        if (grouping_epsilon <= 0) throw ValidationError("EstimatorConfig: grouping_epsilon > 0");
    }
};

/// Joint Lyapunov spectrum: blocks of equal rate tuples, ordered by
/// increasing sum of rates. rates[i] is the exponent under generator i+1.
struct LyapunovSpectrum {
    struct Block {
        int multiplicity = 0;
        std::vector<double> rates; // one per generator, nats per iterate
    };
    std::vector<Block> blocks;
    Eigen::Index dim = 0;
    double grouping_epsilon = 0.0;
    bool grouping_ambiguous = false;

    int total_multiplicity() const {
        int s = 0;
        for (const auto& b : blocks) s += b.multiplicity;
        return s;
    }

    /// Rate of this block along weights/direction w: sum_i w_i * rates_i.
    static double combined_rate(const Block& b, const Vec& w) {
        double s = 0.0;
        for (size_t i = 0; i < b.rates.size(); ++i) s += w[static_cast<Eigen::Index>(i)] * b.rates[i];
        return s;
    }
};

namespace detail {

/// In-place modified Gram-Schmidt; returns the diagonal scale factors.
inline Vec reorthonormalize(Mat& frame) {
    const Eigen::Index d = frame.cols();
    Vec diag(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index p = 0; p < j; ++p)
            frame.col(j) -= frame.col(p).dot(frame.col(j)) * frame.col(p);
        double r = frame.col(j).norm();
        if (!std::isfinite(r)) throw NumericalBlowup("non-finite frame norm");
        if (r < 1e-300) throw DegenerateFrame("near-zero diagonal in re-orthonormalization");
        frame.col(j) /= r;
        diag[j] = r;
    }
    return diag;
}

} // namespace detail

/// Benettin-style finite-time exponents over an arbitrary letter stream.
/// Pushes an orthonormal frame through the tangent maps, re-orthonormalizes
/// every reorth_period letters, accumulates log diagonal factors after
/// burn_in, and divides by (n_steps - burn_in). Sorted descending.
template <class Stream>
std::vector<double> qr_exponents(const ZkAction& action, Stream&& next_letter,
                                 const TorusPoint& x0, const EstimatorConfig& cfg) {
    cfg.validate();
    const Eigen::Index d = action.dim();
    Mat frame = Mat::Identity(d, d);
    Vec logsum = Vec::Zero(d);
    TorusPoint x = x0;
    long since_reorth = 0;
    for (long t = 0; t < cfg.n_steps; ++t) {
        Letter l = next_letter();
        frame = action.tangent(l, x) * frame;
        if (!frame.allFinite()) throw NumericalBlowup("non-finite tangent frame");
        x = action.apply(l, x);
        ++since_reorth;
        // force a factorization at the burn-in boundary so no accumulation
        // interval straddles it
        if (since_reorth == cfg.reorth_period || t + 1 == cfg.n_steps || t + 1 == cfg.burn_in) {
            Vec diag = detail::reorthonormalize(frame);
            if (t + 1 > cfg.burn_in) logsum += diag.array().log().matrix();
            since_reorth = 0;
        }
    }
    std::vector<double> rates(static_cast<size_t>(d));
    for (Eigen::Index j = 0; j < d; ++j)
        rates[static_cast<size_t>(j)] = logsum[j] / static_cast<double>(cfg.n_steps - cfg.burn_in);
    std::sort(rates.begin(), rates.end(), std::greater<double>());
    return rates;
}

struct GroupingResult {
    std::vector<LyapunovSpectrum::Block> blocks;
    bool ambiguous = false;
};

namespace detail {

inline std::vector<int> cluster_labels(const std::vector<std::vector<double>>& tuples,
                                       double epsilon) {
    // union-find over the transitive closure of the sup-norm epsilon relation
    const size_t n = tuples.size();
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int a) {
        while (parent[static_cast<size_t>(a)] != a) {
            parent[static_cast<size_t>(a)] = parent[static_cast<size_t>(parent[static_cast<size_t>(a)])];
            a = parent[static_cast<size_t>(a)];
        }
        return a;
    };
    for (size_t a = 0; a < n; ++a)
        for (size_t b = a + 1; b < n; ++b) {
            double sup = 0.0;
            for (size_t i = 0; i < tuples[a].size(); ++i)
                sup = std::max(sup, std::fabs(tuples[a][i] - tuples[b][i]));
            if (sup <= epsilon) parent[find(static_cast<int>(a))] = find(static_cast<int>(b));
        }
    std::vector<int> label(n);
    for (size_t a = 0; a < n; ++a) label[a] = find(static_cast<int>(a));
    return label;
}

} // namespace detail

/// Partitions d rate k-tuples into blocks (transitive epsilon-closure in
/// sup norm); block rates are cluster means. The ambiguity flag is set when
/// epsilon/2 or 2*epsilon would change the partition.
inline GroupingResult group_exponents(const std::vector<std::vector<double>>& raw,
                                      double epsilon) {
    if (epsilon <= 0) throw ValidationError("group_exponents: epsilon > 0 required");
    auto label = detail::cluster_labels(raw, epsilon);
    GroupingResult out;
    out.ambiguous = detail::cluster_labels(raw, epsilon / 2) != label ||
                    detail::cluster_labels(raw, epsilon * 2) != label;
    std::vector<int> seen;
    for (size_t a = 0; a < raw.size(); ++a) {
        auto it = std::find(seen.begin(), seen.end(), label[a]);
        size_t bi;
        if (it == seen.end()) {
            seen.push_back(label[a]);
            out.blocks.push_back({0, std::vector<double>(raw[a].size(), 0.0)});
            bi = out.blocks.size() - 1;
        } else {
            bi = static_cast<size_t>(it - seen.begin());
        }
        out.blocks[bi].multiplicity += 1;
        for (size_t i = 0; i < raw[a].size(); ++i) out.blocks[bi].rates[i] += raw[a][i];
    }
    for (auto& b : out.blocks)
        for (auto& r : b.rates) r /= b.multiplicity;
    std::sort(out.blocks.begin(), out.blocks.end(), [](const auto& a, const auto& b) {
        return std::accumulate(a.rates.begin(), a.rates.end(), 0.0) <
               std::accumulate(b.rates.begin(), b.rates.end(), 0.0);
    });
    return out;
}

namespace detail {

struct AlignedRates {
    std::vector<std::vector<double>> raw; // row j: rate k-tuple of frame vector j
    std::vector<double> word_rates;       // growth of frame vector j under the word itself
};

/// One pass of the joint-spectrum estimator: align a frame along the orbit
/// of the given combined word and Birkhoff-average, per generator, the QR
/// diagonal of Df_i applied to the aligned frame. The word's own QR
/// diagonals are averaged too; they serve as the alignment self-test.
inline AlignedRates per_generator_rates(const ZkAction& action, const SignedWord& combined,
                                        const TorusPoint& x0, const EstimatorConfig& cfg) {
    const Eigen::Index d = action.dim();
    const int k = action.rank();
    Mat frame = Mat::Identity(d, d);
    TorusPoint x = x0;
    Mat logsum = Mat::Zero(d, k);
    Vec wordsum = Vec::Zero(d);
    for (long t = 0; t < cfg.n_steps; ++t) {
        if (t >= cfg.burn_in) {
            for (int i = 0; i < k; ++i) {
                Mat probe = action.tangent({i, +1}, x) * frame;
                Vec diag = detail::reorthonormalize(probe);
                logsum.col(i) += diag.array().log().matrix();
            }
        }
        for (const Letter& l : combined) {
            frame = action.tangent(l, x) * frame;
            if (!frame.allFinite()) throw NumericalBlowup("non-finite tangent frame");
            x = action.apply(l, x);
            Vec diag = detail::reorthonormalize(frame);
            if (t >= cfg.burn_in) wordsum += diag.array().log().matrix();
        }
    }
    const double steps = static_cast<double>(cfg.n_steps - cfg.burn_in);
    AlignedRates out;
    out.raw.assign(static_cast<size_t>(d), std::vector<double>(static_cast<size_t>(k)));
    out.word_rates.resize(static_cast<size_t>(d));
    for (Eigen::Index j = 0; j < d; ++j) {
        for (int i = 0; i < k; ++i)
            out.raw[static_cast<size_t>(j)][static_cast<size_t>(i)] = logsum(j, i) / steps;
        out.word_rates[static_cast<size_t>(j)] = wordsum[j] / steps;
    }
    return out;
}

// An aligned frame satisfies additivity: the growth of frame vector j
// under the alignment word equals the count-weighted sum of its
// per-generator rates. A large mismatch means the word failed to align
// (e.g. f_1∘f_2 collapses to the identity for the pair (A, A^-1), leaving
// the frame generic while the probes report spurious positive rates).
// Cross-cluster pairs with equal word growth were never separated either.
inline bool misaligned(const AlignedRates& rates, const std::vector<int>& counts,
                       double epsilon) {
    const size_t n = rates.raw.size();
    std::vector<double> comb(n, 0.0);
    for (size_t j = 0; j < n; ++j)
        for (size_t i = 0; i < rates.raw[j].size(); ++i)
            comb[j] += counts[i] * rates.raw[j][i];
    for (size_t j = 0; j < n; ++j)
        if (std::fabs(comb[j] - rates.word_rates[j]) > epsilon) return true;
    auto label = cluster_labels(rates.raw, epsilon);
    for (size_t a = 0; a < n; ++a)
        for (size_t b = a + 1; b < n; ++b)
            if (label[a] != label[b] &&
                std::fabs(rates.word_rates[a] - rates.word_rates[b]) <= epsilon)
                return true;
    return false;
}

} // namespace detail

/// Joint spectrum {(lambda_{i,j}, d_j)}: frame aligned along the orbit of
/// f_1∘...∘f_k, per-generator one-step expansions averaged along the same
/// orbit, then grouped into blocks. When that word fails to separate the
/// clusters (or the grouping is ambiguous) the run is repeated with
/// reweighted words f_1∘f_2^2∘...∘f_k^k and f_1∘f_2^{k+1}∘... .
inline LyapunovSpectrum generator_spectrum(const ZkAction& action, const TorusPoint& x0,
                                           const EstimatorConfig& cfg) {
    cfg.validate();
    const int k = action.rank();
    std::vector<std::vector<int>> candidates{std::vector<int>(static_cast<size_t>(k), 1)};
    if (k > 1) {
        std::vector<int> ramp(static_cast<size_t>(k)), geo(static_cast<size_t>(k));
        int g = 1;
        for (int i = 0; i < k; ++i) {
            ramp[static_cast<size_t>(i)] = i + 1;
            geo[static_cast<size_t>(i)] = g;
            g *= k + 1;
        }
        candidates.push_back(std::move(ramp));
        candidates.push_back(std::move(geo));
    }
    GroupingResult grouped;
    bool settled = false;
    for (const auto& counts : candidates) {
        SignedWord word;
        for (int i = 0; i < k; ++i)
            for (int c = 0; c < counts[static_cast<size_t>(i)]; ++c) word.push_back({i, +1});
        auto rates = detail::per_generator_rates(action, word, x0, cfg);
        grouped = group_exponents(rates.raw, cfg.grouping_epsilon);
        if (!grouped.ambiguous && !detail::misaligned(rates, counts, cfg.grouping_epsilon)) {
            settled = true;
            break;
        }
    }
    if (!settled) grouped.ambiguous = true;
    LyapunovSpectrum spec;
    spec.blocks = std::move(grouped.blocks);
    spec.dim = action.dim();
    spec.grouping_epsilon = cfg.grouping_epsilon;
    spec.grouping_ambiguous = grouped.ambiguous;
    return spec;
}

/// Cyclic stream over a fixed word.
class WordCycle {
public:
    explicit WordCycle(SignedWord w) : word_(std::move(w)) {}
    Letter operator()() {
        Letter l = word_[pos_];
        pos_ = (pos_ + 1) % word_.size();
        return l;
    }

private:
    SignedWord word_;
    size_t pos_ = 0;
};

} // namespace zkdyn
