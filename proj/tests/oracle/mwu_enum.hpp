#pragma once

// Exact two-sided Mann-Whitney p by enumerating every relabelling of the
// pooled sample and scoring each with pairwise comparisons (ties count half).

#include <cstdlib>
#include <map>
#include <vector>

namespace oracle {

// Twice the U statistic of x against y, counted pair by pair.
inline long twice_u_pairwise(const std::vector<double>& x, const std::vector<double>& y)
{
    long u2 = 0;
    for (double a : x) {
        for (double b : y) {
            if (a > b) u2 += 2;
            if (a == b) u2 += 1;
        }
    }
    return u2;
}

struct EnumResult {
    double u;
    double p;
};

// Distribution of 2U over every way of drawing n1 of the pooled values as
// the first sample: value -> number of relabellings.
inline std::map<long, long> twice_u_distribution(const std::vector<double>& pooled, std::size_t n1)
{
    const std::size_t n = pooled.size();
    std::map<long, long> dist;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != n1) continue;
        std::vector<double> x;
        std::vector<double> y;
        for (std::size_t i = 0; i < n; ++i) ((mask >> i) & 1u ? x : y).push_back(pooled[i]);
        ++dist[twice_u_pairwise(x, y)];
    }
    return dist;
}

inline EnumResult p_from_distribution(const std::map<long, long>& dist, long obs, long center2)
{
    const long obs_dev = std::labs(obs - center2);
    long extreme = 0;
    long total = 0;
    for (const auto& [u2, count] : dist) {
        total += count;
        if (std::labs(u2 - center2) >= obs_dev) extreme += count;
    }
    return {static_cast<double>(obs) / 2.0, static_cast<double>(extreme) / static_cast<double>(total)};
}

inline EnumResult mwu_enumerate(const std::vector<double>& a, const std::vector<double>& b)
{
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    const long center2 = static_cast<long>(a.size() * b.size());  // 2 * n1 n2 / 2
    return p_from_distribution(twice_u_distribution(pooled, a.size()), twice_u_pairwise(a, b), center2);
}

}  // namespace oracle
