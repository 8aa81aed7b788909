#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "depthscope/bands.hpp"
#include "depthscope/bits.hpp"

namespace depthscope {

/// Band-inclusion bits for every (band, datapoint) pair plus the band sizes.
///
/// Storage is point-major: the signature of datapoint i occupies
/// words_per_point consecutive words, bit b of that run is band b.
struct InclusionMatrix {
    std::size_t n = 0;
    std::size_t band_count = 0;
    std::size_t words_per_point = 0;
    std::vector<bits::Word> bits;
    std::vector<double> band_sizes;
    std::vector<double> log_band_sizes;

    void reset(std::size_t points, std::size_t bands);
    std::span<const bits::Word> column(std::size_t i) const { return {bits.data() + i * words_per_point, words_per_point}; }
    std::span<bits::Word> column(std::size_t i) { return {bits.data() + i * words_per_point, words_per_point}; }
    bool test(std::size_t band, std::size_t point) const { return bits::test(column(point), band); }

    bool operator==(const InclusionMatrix&) const = default;
};

enum class Backend { Serial, OpenMP };

struct BuildOptions {
    Backend backend = Backend::OpenMP;
    int threads = 0; // 0: OpenMP default
    /// Called with the completed fraction; may be invoked from worker threads.
    std::function<void(double)> progress;
};

InclusionMatrix build_inclusion_matrix(const Dataset& dataset, const BandPlan& plan, const BuildOptions& options = {});

/// Band-size threshold. A band survives when its size is <= the threshold.
/// The log companion decides whenever a size is not a normal positive double
/// (0, subnormal, overflowed), so curve bands stay comparable.
struct Tau {
    double value = std::numeric_limits<double>::infinity();
    double log_value = std::numeric_limits<double>::infinity();

    static Tau infinite() { return {}; }
    static Tau absolute(double v);
    bool is_infinite() const
    {
        return value == std::numeric_limits<double>::infinity() && log_value == std::numeric_limits<double>::infinity();
    }
    bool admits(double size, double log_size) const;
    bool operator==(const Tau&) const = default;
};

/// Band indices ordered by (log size, size, index).
std::vector<std::size_t> band_size_order(std::span<const double> sizes, std::span<const double> log_sizes);

/// Size of the band at sorted position ceil(q * bandCount) - 1, q in [0, 1].
Tau tau_at_quantile(const InclusionMatrix& m, double q);

struct BandMask {
    Tau tau;
    std::vector<bits::Word> words;
    std::size_t unmasked = 0;
};

BandMask mask_by_tau(const InclusionMatrix& m, Tau tau);

/// 1-bit count of each datapoint's masked signature.
std::vector<std::size_t> signature_counts(const InclusionMatrix& m, const BandMask& mask);

/// Throws AnalysisError("signatures", "tau below minimum band size") when every band is masked.
std::vector<double> depth_values(const InclusionMatrix& m, const BandMask& mask);

// Binary format: "DSIM", u32 version, u64 n, u64 bandCount, u64 wordsPerPoint,
// then the words, the band sizes and the log band sizes, all little-endian.
void write_inclusion_matrix(std::ostream& out, const InclusionMatrix& m);
InclusionMatrix read_inclusion_matrix(std::istream& in);
void save_inclusion_matrix(const InclusionMatrix& m, const BandPlan& plan, const std::filesystem::path& path);
/// Loads `path` and its `.plan.json` sidecar.
std::pair<InclusionMatrix, BandPlan> load_inclusion_matrix(const std::filesystem::path& path);

} // namespace depthscope
