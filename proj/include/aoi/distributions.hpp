#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "aoi/rng.hpp"

namespace aoi {

/// Link delay: c + Exp(lambda). shift = 0 is a plain exponential.
class ShiftedExp {
public:
    ShiftedExp(double rate, double shift);

    double rate() const noexcept { return rate_; }
    double shift() const noexcept { return shift_; }
    double mean() const noexcept { return shift_ + 1.0 / rate_; }
    double variance() const noexcept { return 1.0 / (rate_ * rate_); }

    double sample(CounterRng& rng) const noexcept { return shift_ + rng.exponential(rate_); }

    friend bool operator==(const ShiftedExp&, const ShiftedExp&) = default;

private:
    double rate_;
    double shift_;
};

struct OrderStatMoments {
    double mean;
    double variance;
    double second_moment;
};

/// H_n = sum_{j=1}^n 1/j, compensated summation. Throws for n = 0.
double harmonic(std::size_t n);

/// G_n = sum_{j=1}^n 1/j^2, with G_0 = 0.
double gen_harmonic2(std::size_t n);

/// Moments of the k-th smallest of n i.i.d. draws from d.
OrderStatMoments order_stat_moments(const ShiftedExp& d, std::size_t k, std::size_t n);

/// (1/k) sum_{i=1}^k E[X_{i:n}]: mean delay of a delivery that made the earliest k.
double mean_earliest_k_service(const ShiftedExp& d, std::size_t k, std::size_t n);

enum class OrderStatMethod {
    spacings, ///< O(k) exponential-spacings construction
    sort,     ///< draw n, partial sort; kept as a cross-check
};

/// Writes the k smallest of n i.i.d. draws, increasing, into out[0..k).
void sample_order_stat_prefix(const ShiftedExp& d, std::size_t k, std::size_t n, CounterRng& rng,
                              std::span<double> out, OrderStatMethod method = OrderStatMethod::spacings);

std::vector<double> sample_order_stat_prefix(const ShiftedExp& d, std::size_t k, std::size_t n, CounterRng& rng,
                                             OrderStatMethod method = OrderStatMethod::spacings);

/// Per-threshold order-statistic quantities for one hop, for all k in 1..n.
/// Built in O(n); lookups are O(1). Values match the free functions above.
class HopMomentTable {
public:
    HopMomentTable(const ShiftedExp& d, std::size_t n);

    std::size_t n() const noexcept { return n_; }
    const ShiftedExp& delay() const noexcept { return delay_; }

    /// E[X_{k:n}]
    double kth_mean(std::size_t k) const;
    /// Var[X_{k:n}]
    double kth_variance(std::size_t k) const;
    /// (1/k) sum_{i<=k} E[X_{i:n}]
    double service_mean(std::size_t k) const;

private:
    ShiftedExp delay_;
    std::size_t n_;
    std::vector<double> tail_h_;     // H_n - H_{n-k}
    std::vector<double> tail_g_;     // G_n - G_{n-k}
    std::vector<double> tail_h_sum_; // sum_{i<=k} (H_n - H_{n-i})
};

} // namespace aoi
