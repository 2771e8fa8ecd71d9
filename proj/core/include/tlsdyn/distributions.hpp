#pragma once

#include <cstddef>
#include <vector>

#include "tlsdyn/spectra.hpp"

namespace tlsdyn::analysis {

/// constant_time: T1 across frequency at one time index.
/// constant_frequency: T1 across time at one frequency index.
enum class CutAxis { constant_time, constant_frequency };

struct Cut {
    CutAxis axis = CutAxis::constant_time;
    std::size_t index = 0;
};

struct BinPolicy {
    enum class Kind { sturges, fixed_count, fixed_width };
    Kind kind = Kind::sturges;
    std::size_t count = 20;
    double width_us = 1.0;
};

struct Histogram {
    std::vector<double> edges;            // size counts.size() + 1
    std::vector<std::size_t> counts;
    double min = 0.0;
    double median = 0.0;
    double max = 0.0;
    /// Sarle's bimodality coefficient (g² + 1) / (k + 3(n−1)²/((n−2)(n−3))).
    /// Values above 5/9 suggest a multimodal sample. Zero for constant data or n < 4.
    double bimodality_coefficient = 0.0;
    bool multimodal = false;
};

Histogram histogram(const std::vector<double>& values, const BinPolicy& policy = {});

/// Throws std::out_of_range for an invalid cut index.
Histogram t1_distribution(const spectra::T1Dataset& dataset, Cut cut, const BinPolicy& policy = {});

}  // namespace tlsdyn::analysis
