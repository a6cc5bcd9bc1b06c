#include "sbmrobust/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace sbmrobust {

namespace {

// UniformRandomBitGenerator view of Rng for the standard distributions.
struct BitSource {
    using result_type = std::uint64_t;
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()() { return rng.next(); }
    Rng& rng;
};

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng)
{
    for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[rng.below(i)]);
}

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1)
    {
        std::iota(parent_.begin(), parent_.end(), std::uint32_t{0});
    }

    std::uint32_t find(std::uint32_t x)
    {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    std::size_t unite(std::uint32_t a, std::uint32_t b)
    {
        a = find(a);
        b = find(b);
        if (a == b) return size_[a];
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        return size_[a];
    }

private:
    std::vector<std::uint32_t> parent_;
    std::vector<std::size_t> size_;
};

// Integer split of `total` following `quota`, never exceeding `cap`.
std::vector<std::size_t> split_capped(const std::vector<double>& quota,
                                      const std::vector<std::size_t>& cap, std::size_t total)
{
    const std::size_t B = quota.size();
    std::vector<std::size_t> out(B);
    std::vector<double> frac(B);
    std::size_t used = 0;
    for (std::size_t r = 0; r < B; ++r) {
        const double q = std::clamp(quota[r], 0.0, static_cast<double>(cap[r]));
        out[r] = static_cast<std::size_t>(std::floor(q));
        frac[r] = q - static_cast<double>(out[r]);
        used += out[r];
    }
    std::vector<std::size_t> order(B);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
    for (int pass = 0; pass < 2 && used < total; ++pass) {
        for (std::size_t r : order) {
            if (used >= total) break;
            if (out[r] >= cap[r] || (pass == 0 && frac[r] <= 0.0)) continue;
            ++out[r];
            ++used;
        }
    }
    // capacity exhausted everywhere only if total > sum of caps
    while (used < total) {
        bool moved = false;
        for (std::size_t r = 0; r < B && used < total; ++r) {
            if (out[r] < cap[r]) {
                ++out[r];
                ++used;
                moved = true;
            }
        }
        if (!moved) break;
    }
    return out;
}

double largest_component(const SampledNetwork& net, const std::vector<char>& kept)
{
    DisjointSets sets(net.N);
    std::size_t best = 0;
    for (std::size_t i = 0; i < net.N; ++i)
        if (kept[i]) best = 1;
    for (const auto& [a, b] : net.edges)
        if (kept[a] && kept[b]) best = std::max(best, sets.unite(a, b));
    return static_cast<double>(best) / static_cast<double>(net.N);
}

double giant_after_removal(const SampledNetwork& net, const std::vector<std::size_t>& removed, Rng& rng)
{
    std::vector<char> kept(net.N, 1);
    for (int r = 0; r < net.blocks(); ++r) {
        // partial Fisher-Yates over the block's index range
        const std::size_t size = net.block_sizes[r];
        std::vector<std::uint32_t> nodes(size);
        std::iota(nodes.begin(), nodes.end(), static_cast<std::uint32_t>(net.block_start[r]));
        for (std::size_t i = 0; i < removed[r]; ++i) {
            std::swap(nodes[i], nodes[i + rng.below(size - i)]);
            kept[nodes[i]] = 0;
        }
    }
    return largest_component(net, kept);
}

Estimate summarize(const std::vector<double>& xs)
{
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace

std::vector<std::size_t> SampledNetwork::degrees() const
{
    std::vector<std::size_t> deg(N, 0);
    for (const auto& [a, b] : edges) {
        ++deg[a];
        ++deg[b];
    }
    return deg;
}

double SampledNetwork::block_mean_degree(int r) const
{
    if (block_sizes[r] == 0) return 0.0;
    std::size_t stubs = 0;
    for (const auto& [a, b] : edges) stubs += (block_of[a] == r) + (block_of[b] == r);
    return static_cast<double>(stubs) / static_cast<double>(block_sizes[r]);
}

std::vector<std::size_t> removal_counts(const SampledNetwork& net, const PhiVector& phi)
{
    const int B = net.blocks();
    const double N = static_cast<double>(net.N);
    const auto total = static_cast<std::size_t>(std::llround(phi.q * N));
    std::vector<double> quota(B);
    double sum = 0.0;
    for (int r = 0; r < B; ++r) {
        quota[r] = static_cast<double>(net.block_sizes[r]) * (1.0 - phi.phi(r));
        sum += quota[r];
    }
    if (sum > 0.0)
        for (double& x : quota) x *= static_cast<double>(total) / sum;
    return split_capped(quota, net.block_sizes, total);
}

std::vector<std::size_t> apportion(const Eigen::VectorXd& fractions, std::size_t total)
{
    std::vector<double> quota(fractions.size());
    const double sum = fractions.sum();
    for (Eigen::Index r = 0; r < fractions.size(); ++r)
        quota[r] = fractions(r) / sum * static_cast<double>(total);
    return split_capped(quota, std::vector<std::size_t>(quota.size(), total), total);
}

int draw_modified_poisson(double c, Rng& rng)
{
    if (c > 30.0) {
        // P(0) < 1e-13 here; rejecting zeros is exact and almost never loops
        BitSource bits{rng};
        std::poisson_distribution<int> poisson(c);
        int k;
        do {
            k = poisson(bits);
        } while (k == 0);
        return k;
    }
    const double u = rng.uniform();
    double p = c / std::expm1(c);  // p_1
    double cdf = p;
    int k = 1;
    while (cdf <= u && k < 10'000) {
        ++k;
        p *= c / k;
        cdf += p;
        if (p < 1e-300 && k > c) break;
    }
    return k;
}

SampledNetwork sample_network(const BlockModel& model, std::size_t N, Rng& rng)
{
    require_valid(model);
    if (N < 1000) throw std::invalid_argument("sample_network needs N >= 1000");
    if (N > std::numeric_limits<std::uint32_t>::max())
        throw std::invalid_argument("sample_network: N too large");

    const int B = model.blocks();
    const Eigen::VectorXd c = poisson_params(model);
    const Eigen::MatrixXd mix = mixing_matrix(model);

    SampledNetwork net;
    net.N = N;
    net.block_sizes = apportion(model.sizes(), N);
    net.block_start.resize(B);
    net.block_of.resize(N);
    for (int r = 0, start = 0; r < B; ++r) {
        net.block_start[r] = start;
        std::fill_n(net.block_of.begin() + start, net.block_sizes[r], r);
        start += static_cast<int>(net.block_sizes[r]);
    }

    // stubs[r * B + s]: half-edges of block-r nodes aimed at block s
    std::vector<std::vector<std::uint32_t>> stubs(B * B);
    for (int r = 0; r < B; ++r) {
        std::vector<double> cumulative(B);
        std::partial_sum(mix.row(r).begin(), mix.row(r).end(), cumulative.begin());
        for (std::size_t i = 0; i < net.block_sizes[r]; ++i) {
            const auto node = static_cast<std::uint32_t>(net.block_start[r] + i);
            const int k = draw_modified_poisson(c(r), rng);
            for (int j = 0; j < k; ++j) {
                const double u = rng.uniform() * cumulative.back();
                const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
                const int s = std::min<int>(static_cast<int>(it - cumulative.begin()), B - 1);
                stubs[r * B + s].push_back(node);
            }
        }
    }

    net.discarded_stubs.assign(B * B, 0);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> raw;
    for (int r = 0; r < B; ++r) {
        auto& own = stubs[r * B + r];
        shuffle(own, rng);
        if (own.size() % 2 == 1) {
            own.pop_back();
            net.discarded_stubs[r * B + r] = 1;
        }
        for (std::size_t i = 0; i < own.size(); i += 2) raw.emplace_back(own[i], own[i + 1]);

        for (int s = r + 1; s < B; ++s) {
            auto& a = stubs[r * B + s];
            auto& b = stubs[s * B + r];
            shuffle(a, rng);
            shuffle(b, rng);
            const std::size_t m = std::min(a.size(), b.size());
            net.discarded_stubs[r * B + s] = a.size() - m;
            net.discarded_stubs[s * B + r] = b.size() - m;
            for (std::size_t i = 0; i < m; ++i) raw.emplace_back(a[i], b[i]);
        }
    }

    for (auto& [a, b] : raw)
        if (a > b) std::swap(a, b);
    std::sort(raw.begin(), raw.end());
    net.edges.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i].first == raw[i].second) {
            ++net.self_loops_removed;
        } else if (!net.edges.empty() && net.edges.back() == raw[i]) {
            ++net.multi_edges_removed;
        } else {
            net.edges.push_back(raw[i]);
        }
    }
    return net;
}

Estimate mc_giant(const SampledNetwork& network, const BlockModel& model, Schedule schedule,
                  double q, Rng& rng, int trials)
{
    if (trials < 1) throw std::invalid_argument("mc_giant needs at least one trial");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("removed fraction q must lie in [0, 1]");
    const auto removed = removal_counts(network, phi_for(model, schedule, q));
    std::vector<double> values;
    for (int t = 0; t < trials; ++t) {
        Rng stream(rng.next());
        values.push_back(giant_after_removal(network, removed, stream));
    }
    return summarize(values);
}

McCurve mc_robustness(const BlockModel& model, Schedule schedule, std::size_t N, int grid_size,
                      int trials, Rng& rng)
{
    if (grid_size < 3 || grid_size % 2 == 0)
        throw std::invalid_argument("grid size must be odd and at least 3");
    if (trials < 1) throw std::invalid_argument("mc_robustness needs at least one trial");

    const Percolation perc(model);
    McCurve out;
    std::vector<PhiVector> phis;
    for (int i = 0; i < grid_size; ++i) {
        out.q_grid.push_back(static_cast<double>(i) / (grid_size - 1));
        phis.push_back(perc.phi(schedule, out.q_grid.back()));
    }

    std::vector<std::vector<double>> samples(grid_size);
    std::vector<double> r_values;
    for (int t = 0; t < trials; ++t) {
        Rng stream(rng.next());
        const SampledNetwork net = sample_network(model, N, stream);
        std::vector<double> curve(grid_size);
        for (int i = 0; i < grid_size; ++i) {
            curve[i] = giant_after_removal(net, removal_counts(net, phis[i]), stream);
            samples[i].push_back(curve[i]);
        }
        r_values.push_back(2.0 * simpson(curve, 1.0 / (grid_size - 1)));
    }
    for (const auto& s : samples) out.giant.push_back(summarize(s));
    out.robustness = summarize(r_values);
    return out;
}

}  // namespace sbmrobust
