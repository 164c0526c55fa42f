#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "irsbf/types.hpp"

namespace irsbf {

/// The generator used for every random draw in the library.
using Rng = std::mt19937_64;

/// Independent stream for (seed, index) pairs; stable across thread counts.
inline Rng make_stream(std::uint64_t seed, std::uint64_t index)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

/// i.i.d. circularly-symmetric complex Gaussian entries with the given per-entry variance.
template <class S, class Generator>
CMatrix<S> cscg_matrix(Eigen::Index rows, Eigen::Index cols, S variance, Generator& rng)
{
    std::normal_distribution<S> normal(S(0), std::sqrt(variance / S(2)));
    CMatrix<S> out(rows, cols);
    // column-major fill keeps the draw order independent of Eigen's evaluation strategy
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) {
            const S re = normal(rng);
            const S im = normal(rng);
            out(r, c) = {re, im};
        }
    return out;
}

template <class S, class Generator>
CVector<S> cscg_vector(Eigen::Index n, S variance, Generator& rng)
{
    return cscg_matrix<S>(n, 1, variance, rng);
}

} // namespace irsbf
