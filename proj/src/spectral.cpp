#include "depthscope/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "depthscope/error.hpp"

namespace depthscope {

namespace {

constexpr int kMaxQLIterations = 100;
constexpr int kMaxJacobiSweeps = 100;
constexpr double kJacobiTolerance = 1e-10;

// Householder reduction to tridiagonal form. On return V holds the
// orthogonal transform, d the diagonal and e the subdiagonal (e[0] unused).
void tridiagonalize(DenseMatrix& V, std::vector<double>& d, std::vector<double>& e)
{
    const std::size_t n = V.n;
    for (std::size_t j = 0; j < n; ++j) d[j] = V(n - 1, j);

    for (std::size_t i = n - 1; i > 0; --i) {
        double scale = 0.0, h = 0.0;
        for (std::size_t k = 0; k < i; ++k) scale += std::abs(d[k]);
        if (scale == 0.0) {
            e[i] = d[i - 1];
            for (std::size_t j = 0; j < i; ++j) {
                d[j] = V(i - 1, j);
                V(i, j) = 0.0;
                V(j, i) = 0.0;
            }
        } else {
            for (std::size_t k = 0; k < i; ++k) {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            double f = d[i - 1];
            double g = std::sqrt(h);
            if (f > 0) g = -g;
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for (std::size_t j = 0; j < i; ++j) e[j] = 0.0;

            for (std::size_t j = 0; j < i; ++j) {
                f = d[j];
                V(j, i) = f;
                g = e[j] + V(j, j) * f;
                for (std::size_t k = j + 1; k <= i - 1; ++k) {
                    g += V(k, j) * d[k];
                    e[k] += V(k, j) * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for (std::size_t j = 0; j < i; ++j) {
                e[j] /= h;
                f += e[j] * d[j];
            }
            const double hh = f / (h + h);
            for (std::size_t j = 0; j < i; ++j) e[j] -= hh * d[j];
            for (std::size_t j = 0; j < i; ++j) {
                f = d[j];
                g = e[j];
                for (std::size_t k = j; k <= i - 1; ++k) V(k, j) -= (f * e[k] + g * d[k]);
                d[j] = V(i - 1, j);
                V(i, j) = 0.0;
            }
        }
        d[i] = h;
    }

    for (std::size_t i = 0; i + 1 < n; ++i) {
        V(n - 1, i) = V(i, i);
        V(i, i) = 1.0;
        const double h = d[i + 1];
        if (h != 0.0) {
            for (std::size_t k = 0; k <= i; ++k) d[k] = V(k, i + 1) / h;
            for (std::size_t j = 0; j <= i; ++j) {
                double g = 0.0;
                for (std::size_t k = 0; k <= i; ++k) g += V(k, i + 1) * V(k, j);
                for (std::size_t k = 0; k <= i; ++k) V(k, j) -= g * d[k];
            }
        }
        for (std::size_t k = 0; k <= i; ++k) V(k, i + 1) = 0.0;
    }
    for (std::size_t j = 0; j < n; ++j) {
        d[j] = V(n - 1, j);
        V(n - 1, j) = 0.0;
    }
    V(n - 1, n - 1) = 1.0;
    e[0] = 0.0;
}

// Implicit QL on the tridiagonal form, accumulating rotations into V.
void tridiagonal_ql(DenseMatrix& V, std::vector<double>& d, std::vector<double>& e)
{
    const std::size_t n = V.n;
    for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;

    double f = 0.0, tst1 = 0.0;
    const double eps = std::numeric_limits<double>::epsilon();
    for (std::size_t l = 0; l < n; ++l) {
        tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
        std::size_t m = l;
        while (m < n) {
            if (std::abs(e[m]) <= eps * tst1) break;
            ++m;
        }
        if (m > l) {
            int iter = 0;
            do {
                if (++iter > kMaxQLIterations) throw AnalysisError("spectral", "eigensolver failed to converge");
                double g = d[l];
                double p = (d[l + 1] - g) / (2.0 * e[l]);
                double r = std::hypot(p, 1.0);
                if (p < 0) r = -r;
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                const double dl1 = d[l + 1];
                double h = g - d[l];
                for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
                f += h;

                p = d[m];
                double c = 1.0, c2 = 1.0, c3 = 1.0;
                const double el1 = e[l + 1];
                double s = 0.0, s2 = 0.0;
                for (std::size_t i = m; i-- > l;) {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = std::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for (std::size_t k = 0; k < n; ++k) {
                        h = V(k, i + 1);
                        V(k, i + 1) = s * V(k, i) + c * h;
                        V(k, i) = c * V(k, i) - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
            } while (std::abs(e[l]) > eps * tst1);
        }
        d[l] += f;
        e[l] = 0.0;
    }
}

void jacobi(DenseMatrix A, DenseMatrix& V, std::vector<double>& d)
{
    const std::size_t n = A.n;
    V = DenseMatrix(n);
    for (std::size_t i = 0; i < n; ++i) V(i, i) = 1.0;
    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) s += A(i, j) * A(i, j);
        return std::sqrt(s);
    };
    int sweep = 0;
    while (off_norm() >= kJacobiTolerance) {
        if (++sweep > kMaxJacobiSweeps) throw AnalysisError("spectral", "eigensolver failed to converge");
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = A(p, q);
                if (apq == 0.0) continue;
                const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = A(p, k), aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = V(k, p), vkq = V(k, q);
                    V(k, p) = c * vkp - s * vkq;
                    V(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    d.resize(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = A(i, i);
}

void sort_and_sign(std::vector<double>& d, DenseMatrix& V, EigenDecomposition& out)
{
    const std::size_t n = d.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
    out.values.resize(n);
    out.vectors = DenseMatrix(n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t src = idx[j];
        out.values[j] = d[src];
        std::size_t arg = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (std::abs(V(i, src)) > std::abs(V(arg, src))) arg = i;
        const double sign = V(arg, src) < 0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = sign * V(i, src);
    }
}

double sq_dist(const double* a, const double* b, std::size_t dim)
{
    double s = 0.0;
    for (std::size_t c = 0; c < dim; ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
    return s;
}

// Renumber labels by ascending cluster size, ties by first occurrence.
std::vector<int> canonical_labels(const std::vector<int>& raw, std::size_t k)
{
    std::vector<std::size_t> size(k, 0), first(k, std::numeric_limits<std::size_t>::max());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const auto c = static_cast<std::size_t>(raw[i]);
        ++size[c];
        first[c] = std::min(first[c], i);
    }
    std::vector<std::size_t> ids(k);
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    std::sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) {
        if (size[a] != size[b]) return size[a] < size[b];
        return first[a] < first[b];
    });
    std::vector<int> remap(k);
    for (std::size_t r = 0; r < k; ++r) remap[ids[r]] = static_cast<int>(r);
    std::vector<int> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = remap[static_cast<std::size_t>(raw[i])];
    return out;
}

} // namespace

EigenDecomposition eigendecompose(const DenseMatrix& m, EigenMethod method)
{
    EigenDecomposition out;
    const std::size_t n = m.n;
    if (n == 0) return out;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (!std::isfinite(m(i, j))) throw AnalysisError("spectral", "matrix has non-finite entries");

    std::vector<double> d(n, 0.0);
    DenseMatrix V;
    if (method == EigenMethod::Jacobi) {
        jacobi(m, V, d);
    } else {
        V = m;
        std::vector<double> e(n, 0.0);
        tridiagonalize(V, d, e);
        tridiagonal_ql(V, d, e);
    }
    sort_and_sign(d, V, out);
    return out;
}

Laplacian graph_laplacian(const DenseMatrix& S)
{
    Laplacian out;
    std::vector<double> deg(S.n, 0.0);
    for (std::size_t i = 0; i < S.n; ++i) {
        for (std::size_t j = 0; j < S.n; ++j) deg[i] += S(i, j);
        (deg[i] > 0.0 ? out.active : out.isolated).push_back(i);
    }
    const std::size_t m = out.active.size();
    out.L = DenseMatrix(m);
    for (std::size_t a = 0; a < m; ++a) {
        const std::size_t i = out.active[a];
        for (std::size_t b = 0; b < m; ++b) {
            const std::size_t j = out.active[b];
            const double v = S(i, j) / std::sqrt(deg[i] * deg[j]);
            out.L(a, b) = (a == b ? 1.0 : 0.0) - v;
        }
    }
    return out;
}

std::vector<int> connected_components(const DenseMatrix& S)
{
    std::vector<int> comp(S.n, -1);
    int next = 0;
    std::vector<std::size_t> stack;
    for (std::size_t s = 0; s < S.n; ++s) {
        if (comp[s] >= 0) continue;
        comp[s] = next;
        stack.push_back(s);
        while (!stack.empty()) {
            const std::size_t i = stack.back();
            stack.pop_back();
            for (std::size_t j = 0; j < S.n; ++j) {
                if (j != i && comp[j] < 0 && S(i, j) > 0.0) {
                    comp[j] = next;
                    stack.push_back(j);
                }
            }
        }
        ++next;
    }
    return comp;
}

std::vector<int> bipartition(const DenseMatrix& S, const EigenDecomposition& eig)
{
    const std::size_t n = S.n;
    if (n < 2) return std::vector<int>(n, 0);
    const auto comp = connected_components(S);
    if (std::any_of(comp.begin(), comp.end(), [](int c) { return c != 0; })) {
        std::vector<int> labels(n);
        for (std::size_t i = 0; i < n; ++i) labels[i] = comp[i] == comp[0] ? 0 : 1;
        return labels;
    }
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = eig.vectors(i, 1) >= 0.0 ? 0 : 1;
    return labels;
}

KMeansResult kmeans(std::span<const double> points, std::size_t dim, std::size_t k, std::uint64_t seed, int restarts,
                    int max_iterations)
{
    const std::size_t n = dim == 0 ? 0 : points.size() / dim;
    if (k == 0 || k > n) throw AnalysisError("spectral", "k must lie in [1, n]");
    std::mt19937_64 rng(seed);
    KMeansResult best;
    best.wcss = std::numeric_limits<double>::infinity();

    std::vector<double> centers(k * dim), d2(n);
    std::vector<int> assign(n);
    std::vector<std::size_t> counts(k);
    for (int run = 0; run < restarts; ++run) {
        // k-means++ seeding
        std::size_t first = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
        std::copy_n(points.data() + first * dim, dim, centers.begin());
        for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(points.data() + i * dim, centers.data(), dim);
        for (std::size_t c = 1; c < k; ++c) {
            const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
            std::size_t pick;
            if (total > 0.0) {
                pick = std::discrete_distribution<std::size_t>(d2.begin(), d2.end())(rng);
            } else {
                pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
            }
            std::copy_n(points.data() + pick * dim, dim, centers.begin() + static_cast<std::ptrdiff_t>(c * dim));
            for (std::size_t i = 0; i < n; ++i)
                d2[i] = std::min(d2[i], sq_dist(points.data() + i * dim, centers.data() + c * dim, dim));
        }

        std::fill(assign.begin(), assign.end(), -1);
        for (int it = 0; it < max_iterations; ++it) {
            bool changed = false;
            for (std::size_t i = 0; i < n; ++i) {
                int arg = 0;
                double bd = sq_dist(points.data() + i * dim, centers.data(), dim);
                for (std::size_t c = 1; c < k; ++c) {
                    const double dd = sq_dist(points.data() + i * dim, centers.data() + c * dim, dim);
                    if (dd < bd) {
                        bd = dd;
                        arg = static_cast<int>(c);
                    }
                }
                if (assign[i] != arg) {
                    assign[i] = arg;
                    changed = true;
                }
            }
            if (!changed) break;
            std::vector<double> sums(k * dim, 0.0);
            std::fill(counts.begin(), counts.end(), 0);
            for (std::size_t i = 0; i < n; ++i) {
                const auto c = static_cast<std::size_t>(assign[i]);
                ++counts[c];
                for (std::size_t q = 0; q < dim; ++q) sums[c * dim + q] += points[i * dim + q];
            }
            for (std::size_t c = 0; c < k; ++c)
                if (counts[c] > 0)
                    for (std::size_t q = 0; q < dim; ++q) centers[c * dim + q] = sums[c * dim + q] / static_cast<double>(counts[c]);
        }

        double wcss = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            wcss += sq_dist(points.data() + i * dim, centers.data() + static_cast<std::size_t>(assign[i]) * dim, dim);
        if (wcss < best.wcss) {
            best.wcss = wcss;
            best.labels = assign;
        }
    }

    // Empty clusters can survive a run; compact ids before renumbering.
    std::vector<int> compact(k, -1);
    int used = 0;
    for (int& l : best.labels) {
        auto& c = compact[static_cast<std::size_t>(l)];
        if (c < 0) c = used++;
        l = c;
    }
    best.labels = canonical_labels(best.labels, static_cast<std::size_t>(used));
    return best;
}

KMeansResult kway_cluster(const EigenDecomposition& eig, std::size_t k, std::uint64_t seed)
{
    const std::size_t n = eig.values.size();
    if (k < 1 || k > n) throw AnalysisError("spectral", "k must lie in [1, n], got " + std::to_string(k));
    std::vector<double> rows(n * k);
    for (std::size_t i = 0; i < n; ++i) {
        double norm = 0.0;
        for (std::size_t c = 0; c < k; ++c) norm += eig.vectors(i, c) * eig.vectors(i, c);
        norm = std::sqrt(norm);
        for (std::size_t c = 0; c < k; ++c) rows[i * k + c] = norm > 0.0 ? eig.vectors(i, c) / norm : 0.0;
    }
    return kmeans(rows, k, k, seed);
}

SuggestedK suggest_k(std::span<const double> eigenvalues)
{
    SuggestedK out;
    const std::size_t m = std::min<std::size_t>(eigenvalues.size(), 10);
    if (m < 2) return out;
    double best = -1.0, runner = 0.0;
    for (std::size_t i = 0; i + 1 < m; ++i) {
        const double gap = eigenvalues[i + 1] - eigenvalues[i];
        if (gap > best) {
            runner = std::max(runner, best);
            best = gap;
            out.k = i + 1;
        } else {
            runner = std::max(runner, gap);
        }
    }
    if (best <= 0.0) {
        out.k = 1;
        out.confidence = 0.0;
        out.low_confidence = true;
        return out;
    }
    out.confidence = runner > 0.0 ? best / runner : std::numeric_limits<double>::infinity();
    // A dominant first gap at a large second eigenvalue is the "no structure"
    // signature: k = 1, but it is not a confident statement either way.
    out.low_confidence = out.confidence < kLowConfidenceRatio || (out.k == 1 && eigenvalues[1] >= 0.1);
    return out;
}

std::vector<std::size_t> reorder(std::span<const int> labels, std::span<const double> fiedler)
{
    std::vector<std::size_t> idx(labels.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (labels[a] != labels[b]) return labels[a] < labels[b];
        if (fiedler[a] != fiedler[b]) return fiedler[a] < fiedler[b];
        return a < b;
    });
    return idx;
}

SpectralResult spectral_analysis(const DenseMatrix& S, const SpectralOptions& options)
{
    const std::size_t n = S.n;
    SpectralResult r;
    const auto lap = graph_laplacian(S);
    const std::size_t m = lap.active.size();
    r.isolated = lap.isolated;

    const auto eig = eigendecompose(lap.L, options.method);
    r.eigenvalues = eig.values;
    r.suggestion = suggest_k(eig.values);
    r.k = m == 0 ? 0 : options.k.value_or(r.suggestion.k);
    if (options.k && (*options.k < 1 || *options.k > std::max<std::size_t>(m, 1)))
        throw AnalysisError("spectral", "k must lie in [1, " + std::to_string(m) + "], got " + std::to_string(*options.k));

    DenseMatrix sub(m);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) sub(a, b) = S(lap.active[a], lap.active[b]);

    std::vector<int> active_labels(m, 0);
    if (r.k == 2)
        active_labels = bipartition(sub, eig);
    else if (r.k >= 3)
        active_labels = kway_cluster(eig, r.k, options.seed).labels;

    r.labels.assign(n, 0);
    r.fiedler.assign(n, 0.0);
    const std::size_t kdim = std::max<std::size_t>(r.k, 1);
    r.embedding.assign(n * kdim, 0.0);
    for (std::size_t a = 0; a < m; ++a) {
        const std::size_t i = lap.active[a];
        r.labels[i] = active_labels[a];
        if (m >= 2) r.fiedler[i] = eig.vectors(a, 1);
        double norm = 0.0;
        for (std::size_t c = 0; c < std::min(kdim, m); ++c) norm += eig.vectors(a, c) * eig.vectors(a, c);
        norm = std::sqrt(norm);
        for (std::size_t c = 0; c < std::min(kdim, m); ++c)
            r.embedding[i * kdim + c] = norm > 0.0 ? eig.vectors(a, c) / norm : 0.0;
    }
    int next = static_cast<int>(r.k);
    for (std::size_t i : lap.isolated) r.labels[i] = next++;
    r.cluster_count = static_cast<std::size_t>(next);
    r.order = reorder(r.labels, r.fiedler);
    return r;
}

nlohmann::json to_json(const SpectralResult& r)
{
    return {{"eigenvalues", r.eigenvalues},
            {"suggestedK", r.suggestion.k},
            {"confidence", std::isfinite(r.suggestion.confidence) ? nlohmann::json(r.suggestion.confidence) : nlohmann::json(nullptr)},
            {"lowConfidence", r.suggestion.low_confidence},
            {"k", r.k},
            {"clusterCount", r.cluster_count},
            {"labels", r.labels},
            {"order", r.order},
            {"fiedler", r.fiedler},
            {"isolated", r.isolated}};
}

} // namespace depthscope
