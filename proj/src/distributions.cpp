#include "aoi/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "compensated_sum.hpp"

namespace aoi {

namespace {

void check_threshold(std::size_t k, std::size_t n)
{
    if (k == 0 || k > n) {
        throw std::invalid_argument("order statistic index k=" + std::to_string(k) + " must satisfy 1 <= k <= n="
                                    + std::to_string(n));
    }
}

// sum_{j=n-k+1}^{n} 1/j^p, accumulated from j=n downwards.
double tail_sum(std::size_t k, std::size_t n, int power)
{
    detail::CompensatedSum s;
    for (std::size_t i = 0; i < k; ++i) {
        const double j = static_cast<double>(n - i);
        s.add(power == 1 ? 1.0 / j : 1.0 / (j * j));
    }
    return s.value();
}

} // namespace

ShiftedExp::ShiftedExp(double rate, double shift) : rate_(rate), shift_(shift)
{
    if (!(rate > 0.0) || !std::isfinite(rate)) {
        throw std::invalid_argument("shifted exponential rate must be positive and finite");
    }
    if (!(shift >= 0.0) || !std::isfinite(shift)) {
        throw std::invalid_argument("shifted exponential shift must be nonnegative and finite");
    }
}

double harmonic(std::size_t n)
{
    if (n == 0) {
        throw std::invalid_argument("harmonic number requires n >= 1");
    }
    detail::CompensatedSum s;
    for (std::size_t j = 1; j <= n; ++j) {
        s.add(1.0 / static_cast<double>(j));
    }
    return s.value();
}

double gen_harmonic2(std::size_t n)
{
    detail::CompensatedSum s;
    for (std::size_t j = 1; j <= n; ++j) {
        const double x = static_cast<double>(j);
        s.add(1.0 / (x * x));
    }
    return s.value();
}

OrderStatMoments order_stat_moments(const ShiftedExp& d, std::size_t k, std::size_t n)
{
    check_threshold(k, n);
    const double lam = d.rate();
    const double c = d.shift();
    const double dh = tail_sum(k, n, 1); // H_n - H_{n-k}
    const double dg = tail_sum(k, n, 2); // G_n - G_{n-k}

    OrderStatMoments m{};
    m.mean = c + dh / lam;
    m.variance = dg / (lam * lam);
    m.second_moment = c * c + 2.0 * c / lam * dh + (dh * dh + dg) / (lam * lam);
    return m;
}

double mean_earliest_k_service(const ShiftedExp& d, std::size_t k, std::size_t n)
{
    check_threshold(k, n);
    detail::CompensatedSum tail;
    detail::CompensatedSum acc;
    for (std::size_t i = 1; i <= k; ++i) {
        tail.add(1.0 / static_cast<double>(n - i + 1));
        acc.add(tail.value());
    }
    return d.shift() + acc.value() / (static_cast<double>(k) * d.rate());
}

void sample_order_stat_prefix(const ShiftedExp& d, std::size_t k, std::size_t n, CounterRng& rng,
                              std::span<double> out, OrderStatMethod method)
{
    check_threshold(k, n);
    if (out.size() < k) {
        throw std::invalid_argument("output span shorter than k");
    }
    if (method == OrderStatMethod::spacings) {
        // i-th spacing of n exponentials is Exp(lambda (n - i + 1)).
        double t = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            t += rng.exponential(d.rate() * static_cast<double>(n - i));
            out[i] = d.shift() + t;
        }
        return;
    }
    std::vector<double> draws(n);
    for (auto& x : draws) {
        x = d.sample(rng);
    }
    std::partial_sort(draws.begin(), draws.begin() + static_cast<std::ptrdiff_t>(k), draws.end());
    std::copy_n(draws.begin(), k, out.begin());
}

std::vector<double> sample_order_stat_prefix(const ShiftedExp& d, std::size_t k, std::size_t n, CounterRng& rng,
                                             OrderStatMethod method)
{
    std::vector<double> out(k);
    sample_order_stat_prefix(d, k, n, rng, out, method);
    return out;
}

HopMomentTable::HopMomentTable(const ShiftedExp& d, std::size_t n)
    : delay_(d), n_(n), tail_h_(n + 1, 0.0), tail_g_(n + 1, 0.0), tail_h_sum_(n + 1, 0.0)
{
    if (n == 0) {
        throw std::invalid_argument("hop fan-out n must be positive");
    }
    detail::CompensatedSum h;
    detail::CompensatedSum g;
    detail::CompensatedSum hs;
    for (std::size_t k = 1; k <= n; ++k) {
        const double j = static_cast<double>(n - k + 1);
        h.add(1.0 / j);
        g.add(1.0 / (j * j));
        tail_h_[k] = h.value();
        tail_g_[k] = g.value();
        hs.add(tail_h_[k]);
        tail_h_sum_[k] = hs.value();
    }
}

double HopMomentTable::kth_mean(std::size_t k) const
{
    check_threshold(k, n_);
    return delay_.shift() + tail_h_[k] / delay_.rate();
}

double HopMomentTable::kth_variance(std::size_t k) const
{
    check_threshold(k, n_);
    return tail_g_[k] / (delay_.rate() * delay_.rate());
}

double HopMomentTable::service_mean(std::size_t k) const
{
    check_threshold(k, n_);
    return delay_.shift() + tail_h_sum_[k] / (static_cast<double>(k) * delay_.rate());
}

} // namespace aoi
