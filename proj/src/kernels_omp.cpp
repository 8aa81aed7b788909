#include <algorithm>
#include <atomic>
#include <cstdint>

#include <omp.h>

#include "depthscope/kernels.hpp"
#include "kernels_common.hpp"

namespace depthscope::kernels {

void fill_inclusion_omp(const CompiledDataset& data, const BandPlan& plan, InclusionMatrix& out, int threads,
                        const Progress& progress)
{
    const std::size_t B = plan.band_count();
    const auto blocks = static_cast<std::int64_t>(bits::word_count(B));
    const int nt = threads > 0 ? threads : omp_get_max_threads();
    std::atomic<std::int64_t> done{0};
    const std::int64_t report_every = std::max<std::int64_t>(1, blocks / 100);

    // One 64-band block per iteration: every block writes its own word of each column.
#pragma omp parallel num_threads(nt)
    {
        BandEvaluator ev(data);
#pragma omp for schedule(dynamic, 1)
        for (std::int64_t w = 0; w < blocks; ++w) {
            const std::size_t first = static_cast<std::size_t>(w) * bits::kWordBits;
            detail::fill_band_range(ev, plan, first, std::min(B, first + bits::kWordBits), out);
            const std::int64_t d = done.fetch_add(1, std::memory_order_relaxed) + 1;
            if (progress && (d % report_every == 0 || d == blocks)) {
#pragma omp critical(depthscope_progress)
                progress(static_cast<double>(d) / static_cast<double>(blocks));
            }
        }
    }
}

void similarity_omp(const InclusionMatrix& m, std::span<const bits::Word> mask, std::size_t unmasked,
                    SimilarityMode mode, std::span<double> out, int threads)
{
    const auto n = static_cast<std::int64_t>(m.n);
    const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 4) num_threads(nt)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        out[ui * m.n + ui] = 1.0;
        for (std::size_t j = ui + 1; j < m.n; ++j) {
            const double s = detail::pair_similarity(m.column(ui), m.column(j), mask, unmasked, mode);
            out[ui * m.n + j] = s;
            out[j * m.n + ui] = s;
        }
    }
}

} // namespace depthscope::kernels
