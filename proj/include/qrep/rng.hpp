#pragma once

// Deterministic random number support for the Monte-Carlo oracle.
//
// Trials use counter-based substreams: the values drawn inside trial t
// depend only on (seed, t, draw index), never on other trials, so any
// execution order or degree of parallelism reproduces the same estimates
// bit for bit.  Generator contract: 64-bit seeded, deterministic across
// platforms, arbitrarily many decorrelated streams.

#include <cstdint>
#include <cmath>
#include <vector>

namespace qrep {

class SubstreamRng {
public:
    SubstreamRng(std::uint64_t seed, std::uint64_t stream)
        : state_(mix(mix(seed + 0x9e3779b97f4a7c15ULL) ^
                     mix(stream + 0x632be59bd9b4e019ULL))) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    /// Uniform double in the open interval (0,1); never returns an endpoint.
    double next_unit() {
        return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

/// Geometric attempt count, P(k) = (1-p)^(k-1) p for k = 1,2,...
inline std::uint64_t draw_geometric(SubstreamRng& rng, double p) {
    if (p >= 1.0) return 1;
    const double k = std::ceil(std::log(rng.next_unit()) / std::log1p(-p));
    return (k < 1.0) ? 1 : static_cast<std::uint64_t>(k);
}

/// Fixed-order pairwise (binary counter) summation.  The result depends only
/// on the sequence of added values, and partial sums pair up power-of-two
/// blocks, so reductions of per-trial values stay deterministic and accurate.
class PairwiseSum {
public:
    void add(double x) {
        std::uint64_t c = count_++;
        std::size_t level = 0;
        while (c & 1) {
            x += partials_[level];
            ++level;
            c >>= 1;
        }
        if (level < partials_.size())
            partials_[level] = x;
        else
            partials_.push_back(x);
    }

    double total() const {
        double s = 0.0;
        std::uint64_t c = count_;
        for (std::size_t level = 0; level < partials_.size(); ++level, c >>= 1)
            if (c & 1) s += partials_[level];
        return s;
    }

    std::uint64_t count() const { return count_; }

private:
    std::vector<double> partials_;
    std::uint64_t count_ = 0;
};

}  // namespace qrep
