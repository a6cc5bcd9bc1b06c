#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace sbmrobust {

/// Seeded 64-bit Mersenne Twister with a platform-independent uniform draw
/// and a textual state for checkpoints.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 1) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n), n > 0.
    std::size_t below(std::size_t n);

    std::uint64_t next() { return engine_(); }

    std::string state() const;
    void restore(const std::string& state);

private:
    std::mt19937_64 engine_;
};

/// Point in the unit hypercube.
struct Genome {
    std::vector<double> genes;

    std::size_t size() const { return genes.size(); }
    bool operator==(const Genome&) const = default;
};

/// Simulated binary crossover applied to every gene, with a fair coin
/// deciding which child receives which spread value. Children are clamped
/// to [0, 1].
std::pair<Genome, Genome> sbx_crossover(const Genome& p1, const Genome& p2, double eta, Rng& rng);

/// Bounded polynomial mutation on [0, 1]; each gene is perturbed with
/// probability `per_gene_rate`.
Genome polynomial_mutation(const Genome& g, double eta, double per_gene_rate, Rng& rng);

}  // namespace sbmrobust
