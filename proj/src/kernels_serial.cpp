#include <algorithm>

#include "depthscope/kernels.hpp"
#include "kernels_common.hpp"

namespace depthscope::kernels {

void fill_inclusion_serial(const CompiledDataset& data, const BandPlan& plan, InclusionMatrix& out,
                           const Progress& progress)
{
    BandEvaluator ev(data);
    const std::size_t B = plan.band_count();
    const std::size_t step = std::max<std::size_t>(bits::kWordBits, B / 100 / bits::kWordBits * bits::kWordBits);
    for (std::size_t first = 0; first < B; first += step) {
        const std::size_t last = std::min(B, first + step);
        detail::fill_band_range(ev, plan, first, last, out);
        if (progress) progress(static_cast<double>(last) / static_cast<double>(B));
    }
}

void similarity_serial(const InclusionMatrix& m, std::span<const bits::Word> mask, std::size_t unmasked,
                       SimilarityMode mode, std::span<double> out)
{
    const std::size_t n = m.n;
    for (std::size_t i = 0; i < n; ++i) {
        out[i * n + i] = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double s = detail::pair_similarity(m.column(i), m.column(j), mask, unmasked, mode);
            out[i * n + j] = s;
            out[j * n + i] = s;
        }
    }
}

} // namespace depthscope::kernels
