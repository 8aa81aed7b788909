#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "depthscope/kernels.hpp"
#include "depthscope/signatures.hpp"

namespace depthscope {

using kernels::SimilarityMode;

std::string_view to_string(SimilarityMode mode);
SimilarityMode similarity_mode_from_string(std::string_view s);

struct SimilarityMatrix {
    std::size_t n = 0;
    Tau tau;
    std::size_t unmasked = 0;
    SimilarityMode mode = SimilarityMode::Hamming;
    std::vector<double> values; // row-major n x n

    double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }
};

/// Differing bits within `mask`; throws std::invalid_argument on length mismatch.
std::size_t hamming_distance(std::span<const bits::Word> a, std::span<const bits::Word> b,
                             std::span<const bits::Word> mask);
std::size_t hamming_distance(std::span<const bits::Word> a, std::span<const bits::Word> b);

SimilarityMatrix similarity_matrix(const InclusionMatrix& m, const BandMask& mask,
                                   SimilarityMode mode = SimilarityMode::Hamming, Backend backend = Backend::OpenMP);

/// Rounds through float32 and back to the shortest decimal that reproduces it.
double export_float(double v);

/// {"tau":..., "order":[...], "values":[[...]]}; values stay in datapoint order.
nlohmann::json similarity_to_json(const SimilarityMatrix& s, std::span<const std::size_t> order);
/// Matrix rows and columns permuted by `order`, with an index header.
std::string similarity_to_csv(const SimilarityMatrix& s, std::span<const std::size_t> order);

nlohmann::json tau_to_json(const Tau& tau);

} // namespace depthscope
