#pragma once

#include <span>
#include <vector>

namespace aoi {

/// Large-n link parameters for one hop.
struct HopParams {
    double rate;
    double shift;

    void validate() const;
};

/// Per-hop stopping ratios k_l / n, each strictly inside (0, 1).
class AlphaVector {
public:
    explicit AlphaVector(std::vector<double> alphas);

    std::size_t size() const noexcept { return alphas_.size(); }
    double operator[](std::size_t i) const { return alphas_[i]; }
    std::span<const double> values() const noexcept { return alphas_; }

    friend bool operator==(const AlphaVector&, const AlphaVector&) = default;

private:
    std::vector<double> alphas_;
};

/// Generate-at-will single hop: c/a + c/2 + 1/lambda - log(1-a)/(2 lambda).
double age_single_hop_limit(const HopParams& p, double alpha);

/// Single hop with Poisson(mu) arrivals, large-n form.
double age_building_block_approx(const HopParams& p, double mu, double alpha);

/// Two-hop large-n upper bound, written in terms of K1 and K2.
double age_two_hop_approx(const HopParams& p1, const HopParams& p2, const AlphaVector& a);

/// L-hop large-n upper bound; depends on n only through the ratios.
double age_L_hop_approx(std::span<const HopParams> ps, const AlphaVector& a);

} // namespace aoi
