#include "depthscope/similarity.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <stdexcept>

#include "depthscope/error.hpp"

namespace depthscope {

std::string_view to_string(SimilarityMode mode)
{
    return mode == SimilarityMode::Hamming ? "hamming" : "jaccard";
}

SimilarityMode similarity_mode_from_string(std::string_view s)
{
    if (s == "hamming") return SimilarityMode::Hamming;
    if (s == "jaccard") return SimilarityMode::Jaccard;
    throw std::invalid_argument("unknown similarity mode '" + std::string(s) + "'");
}

std::size_t hamming_distance(std::span<const bits::Word> a, std::span<const bits::Word> b,
                             std::span<const bits::Word> mask)
{
    if (a.size() != b.size() || a.size() != mask.size()) throw std::invalid_argument("signature length mismatch");
    return bits::popcount_xor_and(a, b, mask);
}

std::size_t hamming_distance(std::span<const bits::Word> a, std::span<const bits::Word> b)
{
    if (a.size() != b.size()) throw std::invalid_argument("signature length mismatch");
    std::size_t c = 0;
    for (std::size_t i = 0; i < a.size(); ++i) c += static_cast<std::size_t>(std::popcount(a[i] ^ b[i]));
    return c;
}

SimilarityMatrix similarity_matrix(const InclusionMatrix& m, const BandMask& mask, SimilarityMode mode, Backend backend)
{
    if (mask.unmasked == 0) throw AnalysisError("similarity", "tau below minimum band size");
    SimilarityMatrix s;
    s.n = m.n;
    s.tau = mask.tau;
    s.unmasked = mask.unmasked;
    s.mode = mode;
    s.values.assign(m.n * m.n, 0.0);
    if (backend == Backend::Serial)
        kernels::similarity_serial(m, mask.words, mask.unmasked, mode, s.values);
    else
        kernels::similarity_omp(m, mask.words, mask.unmasked, mode, s.values);
    return s;
}

double export_float(double v)
{
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, static_cast<float>(v));
    *r.ptr = '\0';
    return std::strtod(buf, nullptr);
}

nlohmann::json tau_to_json(const Tau& tau)
{
    if (tau.is_infinite()) return {{"infinite", true}, {"value", nullptr}, {"logValue", nullptr}};
    nlohmann::json j{{"infinite", false}, {"value", tau.value}};
    j["logValue"] = std::isfinite(tau.log_value) ? nlohmann::json(tau.log_value) : nlohmann::json(nullptr);
    return j;
}

nlohmann::json similarity_to_json(const SimilarityMatrix& s, std::span<const std::size_t> order)
{
    nlohmann::json values = nlohmann::json::array();
    for (std::size_t a = 0; a < s.n; ++a) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t b = 0; b < s.n; ++b) row.push_back(export_float(s(a, b)));
        values.push_back(std::move(row));
    }
    return {{"tau", tau_to_json(s.tau)},
            {"mode", to_string(s.mode)},
            {"unmaskedBands", s.unmasked},
            {"order", std::vector<std::size_t>(order.begin(), order.end())},
            {"values", std::move(values)}};
}

std::string similarity_to_csv(const SimilarityMatrix& s, std::span<const std::size_t> order)
{
    std::string out = "index";
    for (std::size_t b : order) out += "," + std::to_string(b);
    out += "\n";
    char buf[32];
    for (std::size_t a : order) {
        out += std::to_string(a);
        for (std::size_t b : order) {
            const auto r = std::to_chars(buf, buf + sizeof buf, static_cast<float>(s(a, b)));
            out += ',';
            out.append(buf, r.ptr);
        }
        out += "\n";
    }
    return out;
}

} // namespace depthscope
