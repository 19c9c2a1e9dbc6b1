#include "hetnet/channel.hpp"
#include "hetnet/errors.hpp"
#include "hetnet/solvers.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace hetnet;
using namespace hetnet::solvers;

namespace {

NetworkConfig uniform_config(int n_bs, int users, int subchannels) {
    NetworkConfig cfg;
    cfg.n_macro = 1;
    cfg.n_micro = n_bs - 1;
    cfg.users_per_bs.assign(static_cast<std::size_t>(n_bs), users);
    cfg.n_subchannels = subchannels;
    return cfg;
}

// Counts indicator tensors of one BS in {0,1}^(U*K) that satisfy the
// subchannel constraints.
std::size_t brute_force_local_count(int users, int subchannels) {
    const int bits = users * subchannels;
    std::size_t count = 0;
    for (unsigned mask = 0; mask < (1u << bits); ++mask) {
        auto l = [&](int u, int k) { return (mask >> (u * subchannels + k)) & 1u; };
        bool ok = true;
        for (int k = 0; k < subchannels && ok; ++k) {
            unsigned owners = 0;
            for (int u = 0; u < users; ++u) owners += l(u, k);
            ok = owners <= 1;
        }
        for (int u = 0; u < users && ok; ++u) {
            unsigned held = 0;
            for (int k = 0; k < subchannels; ++k) held += l(u, k);
            ok = held >= 1;
        }
        count += ok;
    }
    return count;
}

// Independent rescan of every (assignment, grid point) on a small instance;
// builds full allocations and scores them with the public metrics.
double brute_force_best_ee(const ChannelTensor& h, const NetworkConfig& cfg, int L) {
    const AssignmentCatalog catalog(cfg);
    const int N = cfg.n_bs();
    const int K = cfg.n_subchannels;
    std::vector<int> levels(static_cast<std::size_t>(N * K), 0);
    double best = -1.0;
    while (true) {
        bool within = true;
        for (int n = 0; n < N; ++n) {
            int s = 0;
            for (int k = 0; k < K; ++k) s += levels[static_cast<std::size_t>(n * K + k)];
            within = within && s <= L;
        }
        if (within) {
            for (std::size_t a = 0; a < catalog.size(); ++a) {
                auto alloc = catalog.allocation(a);
                for (int n = 0; n < N; ++n)
                    for (int k = 0; k < K; ++k) alloc.p(n, k) = levels[static_cast<std::size_t>(n * K + k)] * cfg.p_max(n) / L;
                if (!check_feasible(alloc, cfg, h).ok()) continue;
                best = std::max(best, energy_efficiency(h, alloc, cfg));
            }
        }
        std::size_t i = 0;
        while (i < levels.size() && levels[i] == L) levels[i++] = 0;
        if (i == levels.size()) break;
        ++levels[i];
    }
    return best;
}

} // namespace

TEST(Enumerate, PaperScenarioHasEightAssignments) {
    const auto catalog = enumerate_assignments(NetworkConfig{});
    EXPECT_EQ(catalog.size(), 8u);
    for (const auto& local : catalog.per_bs()) EXPECT_EQ(local.size(), 2u);
}

TEST(Enumerate, SingleUserSingleSubchannel) {
    EXPECT_EQ(enumerate_assignments(uniform_config(1, 1, 1)).size(), 1u);
    EXPECT_EQ(enumerate_assignments(uniform_config(3, 1, 1)).size(), 1u);
}

TEST(Enumerate, MatchesBruteForceCount) {
    for (int users = 1; users <= 3; ++users)
        for (int k = 1; k <= 4; ++k) {
            const auto catalog = AssignmentCatalog(uniform_config(1, users, k));
            EXPECT_EQ(catalog.size(), brute_force_local_count(users, k)) << "U=" << users << " K=" << k;
        }
    // Two users over three subchannels, one subchannel may stay unused.
    EXPECT_EQ(brute_force_local_count(2, 3), 12u);
    EXPECT_EQ(AssignmentCatalog(uniform_config(2, 2, 3)).size(), 144u);
    // More users than subchannels: nothing is valid.
    EXPECT_EQ(AssignmentCatalog(uniform_config(1, 3, 2)).size(), 0u);
}

TEST(Enumerate, EntriesAreValidAndDistinct) {
    const NetworkConfig cfg = uniform_config(3, 2, 3);
    const AssignmentCatalog catalog(cfg);
    std::set<std::vector<std::uint8_t>> seen;
    for (std::size_t a = 0; a < catalog.size(); ++a) {
        const auto alloc = catalog.allocation(a);
        EXPECT_TRUE(check_assignment(alloc, cfg).ok());
        EXPECT_TRUE(seen.insert(alloc.indicator).second);
        EXPECT_EQ(catalog.index_of(alloc), a);
    }
}

TEST(Enumerate, CanonicalOrder) {
    const AssignmentCatalog catalog(NetworkConfig{});
    // Local order for U=2, K=2: (0,1) then (1,0).
    EXPECT_EQ(catalog.per_bs()[0][0].owner, (std::vector<int>{0, 1}));
    EXPECT_EQ(catalog.per_bs()[0][1].owner, (std::vector<int>{1, 0}));
    // BS 0 is the most significant digit.
    EXPECT_EQ(catalog.local_indices(4), (std::vector<std::size_t>{1, 0, 0}));
    EXPECT_EQ(catalog.local_indices(1), (std::vector<std::size_t>{0, 0, 1}));
    const std::vector<std::size_t> local{1, 1, 0};
    EXPECT_EQ(catalog.joint_index(local), 6u);
    EXPECT_THROW(catalog.local_indices(8), ContractError);
}

TEST(Enumerate, IndexOfRejectsInvalid) {
    const NetworkConfig cfg;
    const AssignmentCatalog catalog(cfg);
    auto alloc = catalog.allocation(0);
    alloc.l(0, 1, 0) = 1;
    EXPECT_FALSE(catalog.index_of(alloc).has_value());
}

TEST(PowerGrid, Counts) {
    const NetworkConfig cfg;
    const auto g1 = power_grid(cfg, 1);
    ASSERT_EQ(g1.count(), 3u);
    EXPECT_EQ(g1.level_vectors[0], (std::vector<int>{0, 0}));
    EXPECT_EQ(g1.level_vectors[1], (std::vector<int>{0, 1}));
    EXPECT_EQ(g1.level_vectors[2], (std::vector<int>{1, 0}));
    for (int L = 1; L <= 20; ++L) EXPECT_EQ(power_grid(cfg, L).count(), static_cast<std::size_t>((L + 1) * (L + 2) / 2));
    EXPECT_EQ(power_grid(cfg, 10).count(), 66u);
    EXPECT_THROW(power_grid(cfg, 0), ContractError);
}

TEST(PowerGrid, VectorsRespectBudgetAndNest) {
    const NetworkConfig cfg;
    const auto g10 = power_grid(cfg, 10);
    const auto g20 = power_grid(cfg, 20);
    for (int n = 0; n < cfg.n_bs(); ++n)
        for (std::size_t i = 0; i < g10.count(); ++i) {
            const auto w = g10.vector_w(n, i);
            double s = 0.0;
            for (double v : w) {
                EXPECT_GE(v, 0.0);
                s += v;
            }
            EXPECT_LE(s, cfg.p_max(n) * (1.0 + 1e-12));
            // The same point exists on the finer grid with bit-identical watts.
            std::vector<int> doubled;
            for (int lv : g10.level_vectors[i]) doubled.push_back(2 * lv);
            const auto it = std::find(g20.level_vectors.begin(), g20.level_vectors.end(), doubled);
            ASSERT_NE(it, g20.level_vectors.end());
            EXPECT_EQ(g20.vector_w(n, static_cast<std::size_t>(it - g20.level_vectors.begin())), w);
        }
}

TEST(ExhaustiveSolve, EvaluationCountPaperScenario) {
    const NetworkConfig cfg;
    const auto h = channel::draw_realization(cfg, 1);
    const auto sol = exhaustive_solve(h, cfg, 10);
    EXPECT_EQ(sol.evaluations, 2'299'968u);
    EXPECT_EQ(sol.evaluations, 8u * 66u * 66u * 66u);
    EXPECT_TRUE(sol.feasible);
}

TEST(ExhaustiveSolve, ZeroTargetAlwaysFeasible) {
    const NetworkConfig cfg;
    Rng rng(2);
    for (int i = 0; i < 10; ++i) {
        const auto h = fixtures::random_channel(cfg, rng);
        const auto sol = exhaustive_solve(h, cfg, 2, 0.0);
        EXPECT_TRUE(sol.feasible);
        EXPECT_GE(sol.ee, 0.0);
    }
}

TEST(ExhaustiveSolve, MatchesBruteForceRescan) {
    const NetworkConfig cfg;
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        const auto h = channel::draw_realization(cfg, seed);
        const auto sol = exhaustive_solve(h, cfg, 2);
        ASSERT_TRUE(sol.feasible);
        EXPECT_EQ(sol.ee, brute_force_best_ee(h, cfg, 2)) << "seed " << seed;
    }
}

TEST(ExhaustiveSolve, RescanWithSpectralTarget) {
    NetworkConfig cfg;
    const auto h = channel::draw_realization(cfg, 3);
    const auto free = exhaustive_solve(h, cfg, 2, 0.0);
    // Demand more SE than the unconstrained optimum delivers.
    cfg.se_target_bps_per_hz = spectral_efficiency(h, free.allocation, cfg) * 1.5;
    const auto sol = exhaustive_solve(h, cfg, 2);
    if (sol.feasible) {
        EXPECT_TRUE(check_feasible(sol.allocation, cfg, h).ok());
        EXPECT_EQ(sol.ee, brute_force_best_ee(h, cfg, 2));
        EXPECT_LE(sol.ee, free.ee);
    } else {
        EXPECT_EQ(brute_force_best_ee(h, cfg, 2), -1.0);
    }
}

TEST(ExhaustiveSolve, UnreachableTargetIsInfeasible) {
    const NetworkConfig cfg;
    const auto h = channel::draw_realization(cfg, 4);
    const auto sol = exhaustive_solve(h, cfg, 1, 1e6);
    EXPECT_FALSE(sol.feasible);
    EXPECT_EQ(sol.evaluations, 8u * 27u);
}

TEST(ExhaustiveSolve, ReportedEeIsBitIdenticalAndFeasible) {
    const NetworkConfig cfg;
    for (std::uint64_t seed = 10; seed < 16; ++seed) {
        const auto h = channel::draw_realization(cfg, seed);
        const auto sol = exhaustive_solve(h, cfg, 6);
        EXPECT_EQ(sol.ee, energy_efficiency(h, sol.allocation, cfg));
        EXPECT_TRUE(check_feasible(sol.allocation, cfg, h).ok());
        EXPECT_EQ(AssignmentCatalog(cfg).index_of(sol.allocation), sol.assignment_index);
    }
}

TEST(ExhaustiveSolve, Deterministic) {
    const NetworkConfig cfg;
    const auto h = channel::draw_realization(cfg, 5);
    const auto a = exhaustive_solve(h, cfg, 4);
    const auto b = exhaustive_solve(h, cfg, 4);
    EXPECT_EQ(a.allocation, b.allocation);
    EXPECT_EQ(a.ee, b.ee);
}

TEST(ExhaustiveSolve, TieBreakPrefersLowerPower) {
    // A single BS with zero gain everywhere: every point scores EE 0, so the
    // all-zero power vector must win.
    NetworkConfig cfg = uniform_config(1, 1, 2);
    ChannelTensor h(1, 1, 2);
    const auto sol = exhaustive_solve(h, cfg, 3);
    EXPECT_EQ(sol.ee, 0.0);
    for (double p : sol.allocation.power_w) EXPECT_EQ(p, 0.0);
    EXPECT_EQ(sol.assignment_index, 0u);
}

TEST(ExhaustiveSolve, GridRefinementNeverLowersEe) {
    const NetworkConfig cfg;
    for (std::uint64_t seed = 20; seed < 26; ++seed) {
        const auto h = channel::draw_realization(cfg, seed);
        EXPECT_GE(exhaustive_solve(h, cfg, 4).ee, exhaustive_solve(h, cfg, 2).ee);
    }
}

TEST(Baselines, MaxPowerUsesFullBudget) {
    const NetworkConfig cfg;
    const auto h = channel::draw_realization(cfg, 6);
    const auto a = max_power(h, cfg);
    EXPECT_EQ(a.p(0, 0), 6.0);
    EXPECT_EQ(a.p(0, 1), 6.0);
    for (int n = 1; n < 3; ++n) {
        EXPECT_DOUBLE_EQ(a.p(n, 0), 0.6);
        EXPECT_DOUBLE_EQ(a.p(n, 1), 0.6);
    }
    EXPECT_TRUE(check_feasible(a, cfg, h).ok());
    // Best catalog entry at that power.
    const AssignmentCatalog catalog(cfg);
    auto probe = a;
    const double ee = energy_efficiency(h, a, cfg);
    for (std::size_t i = 0; i < catalog.size(); ++i) {
        catalog.apply(i, probe);
        EXPECT_LE(energy_efficiency(h, probe, cfg), ee);
    }
}

TEST(Baselines, RandomPowerFeasibleAndDeterministic) {
    const NetworkConfig cfg;
    const auto h = channel::draw_realization(cfg, 7);
    Rng rng(11);
    for (int i = 0; i < 1000; ++i) EXPECT_TRUE(check_feasible(random_power(h, cfg, rng), cfg, h).ok());
    Rng a(3), b(3);
    EXPECT_EQ(random_power(h, cfg, a), random_power(h, cfg, b));
}

TEST(Baselines, RandomPowerMean) {
    // With two subchannels, E[p] = 5/12 * P_max under the rescaling rule:
    // 1/6 from the region x + y <= P plus 1/4 from the rescaled region.
    const NetworkConfig cfg;
    const auto h = channel::draw_realization(cfg, 8);
    Rng rng(12);
    std::vector<double> sum(6, 0.0);
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        const auto a = random_power(h, cfg, rng);
        for (std::size_t j = 0; j < 6; ++j) sum[j] += a.power_w[j];
    }
    for (int n = 0; n < 3; ++n)
        for (int k = 0; k < 2; ++k) {
            const double mean = sum[static_cast<std::size_t>(n * 2 + k)] / draws;
            EXPECT_NEAR(mean, 5.0 / 12.0 * cfg.p_max(n), 0.1 * 5.0 / 12.0 * cfg.p_max(n));
            EXPECT_LE(mean, cfg.p_max(n) / 2 * 1.1);
        }
}

TEST(Baselines, OracleDominates) {
    const NetworkConfig cfg;
    Rng rng(13);
    for (std::uint64_t seed = 30; seed < 36; ++seed) {
        const auto h = channel::draw_realization(cfg, seed);
        const auto sol = exhaustive_solve(h, cfg, 10);
        EXPECT_GE(sol.ee, energy_efficiency(h, max_power(h, cfg), cfg));
        for (int i = 0; i < 20; ++i) EXPECT_GE(sol.ee, energy_efficiency(h, random_power(h, cfg, rng), cfg));
    }
}
