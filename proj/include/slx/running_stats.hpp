#pragma once

#include <cmath>
#include <cstddef>

namespace slx {

// Welford accumulator for mean / sample standard deviation / standard error.
// Identical inputs yield exactly zero variance and a mean equal to the input,
// which the ensemble and noiseless-extraction invariants rely on.
class RunningStats {
public:
    void add(double x) {
        ++n_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_ += delta * (x - mean_);
    }

    std::size_t count() const { return n_; }
    double mean() const { return mean_; }

    // Sample variance (n-1 denominator); zero for fewer than two samples.
    double sample_variance() const {
        return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1);
    }

    double sample_std() const { return std::sqrt(sample_variance()); }

    // Standard error of the mean.
    double std_err() const {
        return n_ < 2 ? 0.0 : sample_std() / std::sqrt(static_cast<double>(n_));
    }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

}  // namespace slx
