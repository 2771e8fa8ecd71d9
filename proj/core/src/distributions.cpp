#include "tlsdyn/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tlsdyn::analysis {

namespace {

double bimodality(const std::vector<double>& v) {
    const auto n = static_cast<double>(v.size());
    if (v.size() < 4) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : v) {
        const double d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if (!(m2 > 0.0)) return 0.0;
    // Bias-corrected sample skewness and excess kurtosis.
    const double g1 = m3 / std::pow(m2, 1.5);
    const double g2 = m4 / (m2 * m2) - 3.0;
    const double skew = g1 * std::sqrt(n * (n - 1.0)) / (n - 2.0);
    const double kurt = ((n + 1.0) * g2 + 6.0) * (n - 1.0) / ((n - 2.0) * (n - 3.0));
    return (skew * skew + 1.0) / (kurt + 3.0 * (n - 1.0) * (n - 1.0) / ((n - 2.0) * (n - 3.0)));
}

}  // namespace

Histogram histogram(const std::vector<double>& values, const BinPolicy& policy) {
    if (values.empty()) throw std::invalid_argument("histogram: no values");
    for (double v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument("histogram: non-finite value");
    }
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();

    Histogram h;
    h.min = sorted.front();
    h.max = sorted.back();
    h.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    h.bimodality_coefficient = bimodality(sorted);
    h.multimodal = h.bimodality_coefficient > 5.0 / 9.0;

    if (h.max == h.min) {
        h.edges = {h.min - 0.5, h.max + 0.5};
        h.counts = {n};
        return h;
    }

    const double span = h.max - h.min;
    std::size_t bins = 1;
    switch (policy.kind) {
        case BinPolicy::Kind::sturges:
            bins = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(n)))) + 1;
            break;
        case BinPolicy::Kind::fixed_count:
            if (policy.count == 0) throw std::invalid_argument("histogram: bin count must be positive");
            bins = policy.count;
            break;
        case BinPolicy::Kind::fixed_width:
            if (!(policy.width_us > 0.0)) throw std::invalid_argument("histogram: bin width must be positive");
            bins = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(span / policy.width_us)));
            break;
    }
    const double width = policy.kind == BinPolicy::Kind::fixed_width ? policy.width_us
                                                                      : span / static_cast<double>(bins);
    for (std::size_t i = 0; i <= bins; ++i) h.edges.push_back(h.min + width * static_cast<double>(i));
    h.counts.assign(bins, 0);
    for (double v : sorted) {
        auto b = static_cast<std::size_t>((v - h.min) / width);
        h.counts[std::min(b, bins - 1)]++;
    }
    return h;
}

Histogram t1_distribution(const spectra::T1Dataset& dataset, Cut cut, const BinPolicy& policy) {
    std::vector<double> values;
    if (cut.axis == CutAxis::constant_time) {
        if (cut.index >= dataset.n_times()) throw std::out_of_range("t1_distribution: time index out of range");
        for (std::size_t fi = 0; fi < dataset.n_freqs(); ++fi) values.push_back(dataset.at(cut.index, fi));
    } else {
        if (cut.index >= dataset.n_freqs()) throw std::out_of_range("t1_distribution: frequency index out of range");
        for (std::size_t ti = 0; ti < dataset.n_times(); ++ti) values.push_back(dataset.at(ti, cut.index));
    }
    return histogram(values, policy);
}

}  // namespace tlsdyn::analysis
