#include "aoi/asymptotic.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace aoi {

namespace {

void check_alpha(double a)
{
    if (!(a > 0.0 && a < 1.0)) {
        throw std::invalid_argument("stopping ratio alpha=" + std::to_string(a) + " must lie in (0, 1)");
    }
}

} // namespace

void HopParams::validate() const
{
    if (!(rate > 0.0) || !std::isfinite(rate)) {
        throw std::invalid_argument("hop rate must be positive and finite");
    }
    if (!(shift >= 0.0) || !std::isfinite(shift)) {
        throw std::invalid_argument("hop shift must be nonnegative and finite");
    }
}

AlphaVector::AlphaVector(std::vector<double> alphas) : alphas_(std::move(alphas))
{
    if (alphas_.empty()) {
        throw std::invalid_argument("alpha vector must not be empty");
    }
    for (double a : alphas_) {
        check_alpha(a);
    }
}

double age_single_hop_limit(const HopParams& p, double alpha)
{
    p.validate();
    check_alpha(alpha);
    const double c = p.shift;
    const double lam = p.rate;
    return c / alpha + c / 2.0 + 1.0 / lam - std::log1p(-alpha) / (2.0 * lam);
}

double age_building_block_approx(const HopParams& p, double mu, double alpha)
{
    p.validate();
    check_alpha(alpha);
    if (!(mu > 0.0) || !std::isfinite(mu)) {
        throw std::invalid_argument("arrival rate mu must be positive and finite");
    }
    const double c = p.shift;
    const double lam = p.rate;
    const double log1ma = std::log1p(-alpha);
    return c / alpha + c / 2.0 + 1.0 / lam - log1ma / (2.0 * lam) + 1.0 / (alpha * mu) - 1.0 / (2.0 * mu)
           + 0.5 / (mu * mu * c - mu * mu * log1ma / lam + mu);
}

double age_two_hop_approx(const HopParams& p1, const HopParams& p2, const AlphaVector& a)
{
    p1.validate();
    p2.validate();
    if (a.size() != 2) {
        throw std::invalid_argument("two-hop approximation needs exactly two ratios");
    }
    const double lam = p1.rate;
    const double c = p1.shift;
    const double lt = p2.rate;
    const double ct = p2.shift;
    const double a1 = a[0];
    const double a2 = a[1];
    const double log1 = std::log1p(-a1);
    const double log2 = std::log1p(-a2);
    const double k1 = lam * c - log1;
    const double k2 = lt * ct - log2;

    return 1.0 / lam + 1.0 / lt + ct / a2 + ct / 2.0 - log2 / (2.0 * lt)
           + (2.0 - a2 + 2.0 * a1 * a2) / (2.0 * a1 * a2) * c
           + lt * k1 * k1 / (2.0 * a1 * lam * (lam * a1 * k2 + lt * k1))
           + (3.0 * a2 - 2.0 * a1 * a2 - 2.0) / (2.0 * a1 * a2 * lam) * log1;
}

double age_L_hop_approx(std::span<const HopParams> ps, const AlphaVector& a)
{
    if (ps.empty() || ps.size() != a.size()) {
        throw std::invalid_argument("need one alpha per hop and at least one hop");
    }
    const std::size_t L = ps.size();

    double service = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
        ps[l].validate();
        const double al = a[l];
        service += ps[l].shift + 1.0 / ps[l].rate + (1.0 - al) / (al * ps[l].rate) * std::log1p(-al);
    }

    // w_l = (c_l - log(1 - a_l)/lambda_l) prod_{i=l}^{L-1} 1/a_i
    double upstream = 0.0; // sum over l < L
    for (std::size_t l = 0; l + 1 < L; ++l) {
        double w = ps[l].shift - std::log1p(-a[l]) / ps[l].rate;
        for (std::size_t i = l; i + 1 < L; ++i) {
            w /= a[i];
        }
        upstream += w;
    }
    const double last = ps[L - 1].shift - std::log1p(-a[L - 1]) / ps[L - 1].rate;
    const double all = upstream + last;
    const double aL = a[L - 1];

    return service + (2.0 - aL) / (2.0 * aL) * all + upstream * upstream / (2.0 * all);
}

} // namespace aoi
