#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "depthscope/bands.hpp"
#include "depthscope/bits.hpp"
#include "depthscope/signatures.hpp"

// Hot loops, each in a serial reference flavour and an OpenMP flavour.
// Both flavours must produce identical output.
namespace depthscope::kernels {

using Progress = std::function<void(double)>;

enum class SimilarityMode { Hamming, Jaccard };

/// Fills `out` (already reset to n x bandCount) with inclusion bits and band sizes.
void fill_inclusion_serial(const CompiledDataset& data, const BandPlan& plan, InclusionMatrix& out,
                           const Progress& progress = {});
void fill_inclusion_omp(const CompiledDataset& data, const BandPlan& plan, InclusionMatrix& out, int threads = 0,
                        const Progress& progress = {});

/// Dense row-major n x n similarity of masked signatures.
void similarity_serial(const InclusionMatrix& m, std::span<const bits::Word> mask, std::size_t unmasked,
                       SimilarityMode mode, std::span<double> out);
void similarity_omp(const InclusionMatrix& m, std::span<const bits::Word> mask, std::size_t unmasked,
                    SimilarityMode mode, std::span<double> out, int threads = 0);

} // namespace depthscope::kernels
