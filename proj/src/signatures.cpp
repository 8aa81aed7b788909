#include "depthscope/signatures.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include "depthscope/error.hpp"
#include "depthscope/kernels.hpp"

namespace depthscope {

namespace {

constexpr char kMagic[4] = {'D', 'S', 'I', 'M'};
constexpr std::uint32_t kFormatVersion = 1;

bool normal_positive(double v) { return std::isnormal(v) && v > 0.0; }

template <class T>
void put_le(std::ostream& out, T v)
{
    static_assert(std::is_integral_v<T>);
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xffu);
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T get_le(std::istream& in)
{
    unsigned char buf[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) throw IngestError("inclusion matrix: truncated file");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return static_cast<T>(v);
}

void put_double(std::ostream& out, double d) { put_le(out, std::bit_cast<std::uint64_t>(d)); }
double get_double(std::istream& in) { return std::bit_cast<double>(get_le<std::uint64_t>(in)); }

} // namespace

void InclusionMatrix::reset(std::size_t points, std::size_t bands)
{
    n = points;
    band_count = bands;
    words_per_point = bits::word_count(bands);
    bits.assign(n * words_per_point, 0);
    band_sizes.assign(bands, 0.0);
    log_band_sizes.assign(bands, 0.0);
}

InclusionMatrix build_inclusion_matrix(const Dataset& dataset, const BandPlan& plan, const BuildOptions& options)
{
    if (plan.n != dataset.size()) throw AnalysisError("signatures", "band plan does not match dataset size");
    CompiledDataset data(dataset);
    InclusionMatrix m;
    m.reset(dataset.size(), plan.band_count());
    if (options.backend == Backend::Serial)
        kernels::fill_inclusion_serial(data, plan, m, options.progress);
    else
        kernels::fill_inclusion_omp(data, plan, m, options.threads, options.progress);
    return m;
}

Tau Tau::absolute(double v)
{
    if (std::isnan(v) || v < 0.0) throw AnalysisError("signatures", "tau must be nonnegative");
    return {v, v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity()};
}

bool Tau::admits(double size, double log_size) const
{
    if (is_infinite()) return true;
    if (normal_positive(size) && normal_positive(value)) return size <= value;
    return log_size <= log_value;
}

std::vector<std::size_t> band_size_order(std::span<const double> sizes, std::span<const double> log_sizes)
{
    std::vector<std::size_t> idx(sizes.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (log_sizes[a] != log_sizes[b]) return log_sizes[a] < log_sizes[b];
        if (sizes[a] != sizes[b]) return sizes[a] < sizes[b];
        return a < b;
    });
    return idx;
}

Tau tau_at_quantile(const InclusionMatrix& m, double q)
{
    if (!(q >= 0.0 && q <= 1.0)) throw AnalysisError("signatures", "tau quantile must lie in [0, 1]");
    if (m.band_count == 0) throw AnalysisError("signatures", "no bands");
    const auto idx = band_size_order(m.band_sizes, m.log_band_sizes);
    const auto pos = static_cast<std::ptrdiff_t>(std::ceil(q * static_cast<double>(m.band_count))) - 1;
    const auto k = idx[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(pos, 0, static_cast<std::ptrdiff_t>(m.band_count) - 1))];
    return {m.band_sizes[k], m.log_band_sizes[k]};
}

BandMask mask_by_tau(const InclusionMatrix& m, Tau tau)
{
    BandMask mask;
    mask.tau = tau;
    mask.words.assign(m.words_per_point, 0);
    for (std::size_t b = 0; b < m.band_count; ++b) {
        if (tau.admits(m.band_sizes[b], m.log_band_sizes[b])) {
            bits::set(mask.words, b);
            ++mask.unmasked;
        }
    }
    return mask;
}

std::vector<std::size_t> signature_counts(const InclusionMatrix& m, const BandMask& mask)
{
    std::vector<std::size_t> c(m.n);
    for (std::size_t i = 0; i < m.n; ++i) c[i] = bits::popcount_and(m.column(i), mask.words);
    return c;
}

std::vector<double> depth_values(const InclusionMatrix& m, const BandMask& mask)
{
    if (mask.unmasked == 0) throw AnalysisError("signatures", "tau below minimum band size");
    const auto counts = signature_counts(m, mask);
    std::vector<double> d(m.n);
    for (std::size_t i = 0; i < m.n; ++i) d[i] = static_cast<double>(counts[i]) / static_cast<double>(mask.unmasked);
    return d;
}

void write_inclusion_matrix(std::ostream& out, const InclusionMatrix& m)
{
    out.write(kMagic, 4);
    put_le<std::uint32_t>(out, kFormatVersion);
    put_le<std::uint64_t>(out, m.n);
    put_le<std::uint64_t>(out, m.band_count);
    put_le<std::uint64_t>(out, m.words_per_point);
    for (bits::Word w : m.bits) put_le<std::uint64_t>(out, w);
    for (double d : m.band_sizes) put_double(out, d);
    for (double d : m.log_band_sizes) put_double(out, d);
    if (!out) throw std::runtime_error("inclusion matrix: write failed");
}

InclusionMatrix read_inclusion_matrix(std::istream& in)
{
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw IngestError("inclusion matrix: bad magic");
    if (get_le<std::uint32_t>(in) != kFormatVersion) throw IngestError("inclusion matrix: unsupported version");
    InclusionMatrix m;
    const auto n = get_le<std::uint64_t>(in);
    const auto bands = get_le<std::uint64_t>(in);
    const auto wpp = get_le<std::uint64_t>(in);
    if (wpp != bits::word_count(bands)) throw IngestError("inclusion matrix: inconsistent header");
    m.reset(n, bands);
    for (auto& w : m.bits) w = get_le<std::uint64_t>(in);
    for (auto& d : m.band_sizes) d = get_double(in);
    for (auto& d : m.log_band_sizes) d = get_double(in);
    return m;
}

void save_inclusion_matrix(const InclusionMatrix& m, const BandPlan& plan, const std::filesystem::path& path)
{
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        write_inclusion_matrix(out, m);
    }
    std::ofstream side(path.string() + ".plan.json");
    side << to_json(plan).dump();
}

std::pair<InclusionMatrix, BandPlan> load_inclusion_matrix(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot read " + path.string());
    auto m = read_inclusion_matrix(in);
    std::ifstream side(path.string() + ".plan.json");
    if (!side) throw IngestError("missing band plan sidecar for " + path.string());
    auto plan = band_plan_from_json(nlohmann::json::parse(side));
    if (plan.n != m.n || plan.band_count() != m.band_count) throw IngestError("band plan sidecar does not match matrix");
    return {std::move(m), std::move(plan)};
}

} // namespace depthscope
