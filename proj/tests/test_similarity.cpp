#include <doctest.h>

#include <numeric>
#include <random>

#include "depthscope/error.hpp"
#include "depthscope/similarity.hpp"
#include "depthscope/synthetic.hpp"
#include "oracle.hpp"

using namespace depthscope;

namespace {

std::vector<bits::Word> pack(const std::vector<int>& v)
{
    std::vector<bits::Word> w(bits::word_count(v.size()), 0);
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i]) bits::set(w, i);
    return w;
}

InclusionMatrix build(const Dataset& ds)
{
    return build_inclusion_matrix(ds, plan_bands(ds, std::nullopt, 0));
}

Dataset scalars(std::vector<double> xs)
{
    Dataset ds;
    ds.schema = {AttributeSchema::scalar("x")};
    for (double x : xs) ds.rows.push_back({x});
    return ds;
}

} // namespace

TEST_CASE("hamming distance examples")
{
    CHECK(hamming_distance(pack({1, 1, 0}), pack({1, 0, 0})) == 1);
    CHECK(hamming_distance(pack({1, 0, 1}), pack({1, 0, 1})) == 0);
    CHECK(hamming_distance(pack({1, 1, 1, 1}), pack({0, 0, 0, 0})) == 4);
    CHECK(hamming_distance(pack({1, 1, 1, 1}), pack({0, 0, 0, 0}), pack({1, 0, 1, 0})) == 2);
    CHECK_THROWS_AS(hamming_distance(pack(std::vector<int>(65, 1)), pack({1})), std::invalid_argument);
}

TEST_CASE("word-parallel distance equals a bit loop on random signatures")
{
    std::mt19937_64 rng(123);
    std::bernoulli_distribution coin(0.4);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t len = 1 + static_cast<std::size_t>(trial) * 7;
        std::vector<int> a(len), b(len), m(len);
        for (std::size_t i = 0; i < len; ++i) a[i] = coin(rng), b[i] = coin(rng), m[i] = coin(rng) || coin(rng);
        std::size_t naive = 0;
        for (std::size_t i = 0; i < len; ++i) naive += (m[i] && a[i] != b[i]) ? 1 : 0;
        CHECK(hamming_distance(pack(a), pack(b), pack(m)) == naive);
    }
}

TEST_CASE("similarity of three scalars")
{
    const auto m = build(scalars({1, 2, 3}));
    const auto s = similarity_matrix(m, mask_by_tau(m, Tau::infinite()));
    CHECK(s(0, 2) == doctest::Approx(1.0 / 3.0));
    CHECK(s(0, 1) == doctest::Approx(2.0 / 3.0));
    CHECK(s(1, 1) == 1.0);
}

TEST_CASE("identical datapoints are fully similar")
{
    const auto m = build(scalars({1, 4, 4, 9}));
    const auto s = similarity_matrix(m, mask_by_tau(m, Tau::infinite()));
    CHECK(s(1, 2) == 1.0);
}

TEST_CASE("matrix invariants and naive agreement")
{
    const auto ds = generate_synthetic(MixedCategorical{30, 3, 6, 2}, 2);
    const auto m = build(ds);
    for (double q : {0.2, 0.6, 1.0}) {
        const auto mask = mask_by_tau(m, tau_at_quantile(m, q));
        const auto s = similarity_matrix(m, mask);
        std::vector<std::vector<bool>> cols(m.n);
        for (std::size_t i = 0; i < m.n; ++i)
            for (std::size_t b = 0; b < m.band_count; ++b)
                if (bits::test(mask.words, b)) cols[i].push_back(m.test(b, i));
        for (std::size_t i = 0; i < m.n; ++i) {
            CHECK(s(i, i) == 1.0);
            for (std::size_t j = 0; j < m.n; ++j) {
                CHECK(s(i, j) == s(j, i));
                CHECK(s(i, j) >= 0.0);
                CHECK(s(i, j) <= 1.0);
                CHECK(s(i, j) == doctest::Approx(oracle::naive_similarity(cols[i], cols[j])).epsilon(1e-15));
                for (std::size_t k = 0; k < m.n; ++k)
                    CHECK((1 - s(i, k)) <= (1 - s(i, j)) + (1 - s(j, k)) + 1e-12);
            }
        }
    }
}

TEST_CASE("permuting datapoints permutes the matrix")
{
    const auto ds = generate_synthetic(Bimodal1D{40, {-3, 3}, {1, 1}, 0.5}, 5);
    std::vector<std::size_t> perm(ds.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(1));
    Dataset shuffled = ds;
    for (std::size_t i = 0; i < ds.size(); ++i) shuffled.rows[i] = ds.rows[perm[i]];
    shuffled.ground_truth.clear();

    const auto m1 = build(ds), m2 = build(shuffled);
    // Absolute tau: the band multiset is the same, so the same bands survive.
    const auto s1 = similarity_matrix(m1, mask_by_tau(m1, Tau::absolute(1.5)));
    const auto s2 = similarity_matrix(m2, mask_by_tau(m2, Tau::absolute(1.5)));
    CHECK(s1.unmasked == s2.unmasked);
    for (std::size_t i = 0; i < ds.size(); ++i)
        for (std::size_t j = 0; j < ds.size(); ++j) CHECK(s2(i, j) == s1(perm[i], perm[j]));
}

TEST_CASE("jaccard mode ignores shared zeros")
{
    const auto m = build(scalars({0, 1, 2, 3, 50, 100}));
    const auto mask = mask_by_tau(m, Tau::absolute(1.0));
    const auto h = similarity_matrix(m, mask, SimilarityMode::Hamming);
    const auto j = similarity_matrix(m, mask, SimilarityMode::Jaccard);
    // Points 4 and 5 sit in no surviving band: hamming calls them identical, jaccard unrelated.
    CHECK(h(4, 5) == 1.0);
    CHECK(j(4, 5) == 0.0);
    CHECK(j(4, 4) == 1.0);
    CHECK(j(0, 1) == doctest::Approx(1.0 / 2.0));
    CHECK(similarity_mode_from_string("jaccard") == SimilarityMode::Jaccard);
    CHECK_THROWS(similarity_mode_from_string("cosine"));
}

TEST_CASE("fully masked signatures are an analysis error")
{
    const auto m = build(scalars({0, 1, 3}));
    CHECK_THROWS_AS(similarity_matrix(m, mask_by_tau(m, Tau::absolute(0.5))), AnalysisError);
}

TEST_CASE("exports")
{
    const auto m = build(scalars({1, 2, 3, 10}));
    const auto s = similarity_matrix(m, mask_by_tau(m, Tau::infinite()));
    const std::vector<std::size_t> order{3, 0, 1, 2};
    const auto j = similarity_to_json(s, order);
    CHECK(j["order"] == nlohmann::json(order));
    CHECK(j["values"].size() == 4);
    CHECK(j["values"][0][2].get<double>() == export_float(s(0, 2)));
    CHECK(j["tau"]["infinite"] == true);
    CHECK(static_cast<float>(export_float(1.0 / 3.0)) == static_cast<float>(1.0 / 3.0));
    CHECK(export_float(1.0 / 3.0) == 0.33333334);

    const auto csv = similarity_to_csv(s, order);
    CHECK(csv.rfind("index,3,0,1,2\n3,1,", 0) == 0);
}
