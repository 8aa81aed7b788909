#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "depthscope/dataset.hpp"

namespace depthscope {

struct Unimodal1D {
    std::size_t n = 99;
    double mean = 0.0;
    double sd = 1.0;
};

/// Two-component Gaussian mixture; `mixture` is the probability of component 1.
struct Bimodal1D {
    std::size_t n = 99;
    std::vector<double> means{-3.0, 3.0};
    std::vector<double> sds{1.0, 1.0};
    double mixture = 0.5;
};

/// Hurricane-style track ensemble: a 2D track curve plus wind and pressure
/// functions over the same time axis, with `modes` bifurcating track families.
struct CurveEnsemble {
    std::size_t n = 21;
    std::size_t time_points = 60;
    std::size_t modes = 2;
};

/// Mixed categorical/numeric table with latent groups, shaped like the UCI
/// mushroom data (mostly categorical attributes, a few continuous ones).
struct MixedCategorical {
    std::size_t n = 100;
    std::size_t groups = 3;
    std::size_t categorical = 20;
    std::size_t numeric = 3;
};

/// Wide mixed-type table used for throughput measurements.
struct WideMixed {
    std::size_t n = 250;
    std::size_t attributes = 53;
};

using SyntheticSpec = std::variant<Unimodal1D, Bimodal1D, CurveEnsemble, MixedCategorical, WideMixed>;

/// Pure function of (spec, seed). Mode labels go to Dataset::ground_truth.
Dataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

} // namespace depthscope
