#pragma once

#include <cstddef>
#include <span>

#include "depthscope/bits.hpp"
#include "depthscope/kernels.hpp"

namespace depthscope::kernels::detail {

inline double pair_similarity(std::span<const bits::Word> a, std::span<const bits::Word> b,
                              std::span<const bits::Word> mask, std::size_t unmasked, SimilarityMode mode)
{
    const std::size_t diff = bits::popcount_xor_and(a, b, mask);
    if (mode == SimilarityMode::Hamming) return 1.0 - static_cast<double>(diff) / static_cast<double>(unmasked);
    const std::size_t either = bits::popcount_or_and(a, b, mask);
    if (either == 0) return 0.0;
    return static_cast<double>(either - diff) / static_cast<double>(either);
}

/// Evaluates bands [first, last) into the word-aligned block they share.
inline void fill_band_range(BandEvaluator& ev, const BandPlan& plan, std::size_t first, std::size_t last,
                            InclusionMatrix& out)
{
    const std::size_t n = out.n;
    for (std::size_t b = first; b < last; ++b) {
        ev.prepare(plan.band(b));
        out.band_sizes[b] = ev.total_size();
        out.log_band_sizes[b] = ev.log_size();
        const std::size_t w = b / bits::kWordBits;
        const bits::Word bit = bits::Word{1} << (b % bits::kWordBits);
        for (std::size_t i = 0; i < n; ++i)
            if (ev.includes(i)) out.bits[i * out.words_per_point + w] |= bit;
    }
}

} // namespace depthscope::kernels::detail
