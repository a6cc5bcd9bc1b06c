#include "sbmrobust/variation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sbmrobust {

std::size_t Rng::below(std::size_t n)
{
    if (n == 0) throw std::invalid_argument("Rng::below needs n > 0");
    // rejection keeps the draw unbiased
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % n);
}

std::string Rng::state() const
{
    std::ostringstream out;
    out << engine_;
    return out.str();
}

void Rng::restore(const std::string& state)
{
    std::istringstream in(state);
    std::mt19937_64 engine;
    in >> engine;
    if (in.fail()) throw std::invalid_argument("corrupt random generator state");
    engine_ = engine;
}

std::pair<Genome, Genome> sbx_crossover(const Genome& p1, const Genome& p2, double eta, Rng& rng)
{
    if (p1.size() != p2.size()) throw std::invalid_argument("sbx_crossover: parent lengths differ");
    if (!(eta > 0.0)) throw std::invalid_argument("sbx_crossover: eta must be positive");

    Genome c1 = p1;
    Genome c2 = p2;
    const double exponent = 1.0 / (eta + 1.0);
    for (std::size_t i = 0; i < p1.size(); ++i) {
        const double u = rng.uniform();
        const double beta = u <= 0.5 ? std::pow(2.0 * u, exponent)
                                     : std::pow(1.0 / (2.0 * (1.0 - u)), exponent);
        const double x1 = p1.genes[i];
        const double x2 = p2.genes[i];
        const double mid = 0.5 * (x1 + x2);
        const double half = 0.5 * beta * (x2 - x1);
        double y1 = mid - half;
        double y2 = mid + half;
        if (rng.uniform() < 0.5) std::swap(y1, y2);
        c1.genes[i] = std::clamp(y1, 0.0, 1.0);
        c2.genes[i] = std::clamp(y2, 0.0, 1.0);
    }
    return {std::move(c1), std::move(c2)};
}

Genome polynomial_mutation(const Genome& g, double eta, double per_gene_rate, Rng& rng)
{
    if (!(eta > 0.0)) throw std::invalid_argument("polynomial_mutation: eta must be positive");
    if (!(per_gene_rate >= 0.0 && per_gene_rate <= 1.0))
        throw std::invalid_argument("polynomial_mutation: rate must lie in [0, 1]");

    Genome out = g;
    const double power = 1.0 / (eta + 1.0);
    for (double& y : out.genes) {
        if (!(rng.uniform() < per_gene_rate)) continue;
        // distances to the bounds of [0, 1]
        const double d_lo = y;
        const double d_hi = 1.0 - y;
        const double u = rng.uniform();
        double delta;
        if (u < 0.5) {
            const double v = 2.0 * u + (1.0 - 2.0 * u) * std::pow(1.0 - d_lo, eta + 1.0);
            delta = std::pow(v, power) - 1.0;
        } else {
            const double v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(1.0 - d_hi, eta + 1.0);
            delta = 1.0 - std::pow(v, power);
        }
        y = std::clamp(y + delta, 0.0, 1.0);
    }
    return out;
}

}  // namespace sbmrobust
