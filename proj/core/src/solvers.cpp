#include "hetnet/solvers.hpp"

#include "hetnet/errors.hpp"

#include <algorithm>
#include <limits>

namespace hetnet::solvers {

namespace {

std::vector<LocalAssignment> enumerate_local(int users, int subchannels) {
    // Digits take values -1..users-1; k = 0 is the most significant digit.
    std::vector<LocalAssignment> out;
    std::vector<int> owner(static_cast<std::size_t>(subchannels), -1);
    while (true) {
        std::vector<int> held(static_cast<std::size_t>(users), 0);
        for (int o : owner)
            if (o >= 0) ++held[static_cast<std::size_t>(o)];
        if (std::all_of(held.begin(), held.end(), [](int c) { return c > 0; })) out.push_back({owner});

        int k = subchannels - 1;
        while (k >= 0 && owner[static_cast<std::size_t>(k)] == users - 1) {
            owner[static_cast<std::size_t>(k)] = -1;
            --k;
        }
        if (k < 0) break;
        ++owner[static_cast<std::size_t>(k)];
    }
    return out;
}

void enumerate_levels(int K, int L, std::vector<int>& current, std::vector<std::vector<int>>& out, int remaining) {
    if (static_cast<int>(current.size()) == K) {
        out.push_back(current);
        return;
    }
    for (int lvl = 0; lvl <= remaining; ++lvl) {
        current.push_back(lvl);
        enumerate_levels(K, L, current, out, remaining - lvl);
        current.pop_back();
    }
}

} // namespace

AssignmentCatalog::AssignmentCatalog(const NetworkConfig& cfg) : cfg_(cfg) {
    cfg.validate();
    for (int n = 0; n < cfg.n_bs(); ++n) {
        per_bs_.push_back(enumerate_local(cfg.users_of(n), cfg.n_subchannels));
        size_ *= per_bs_.back().size();
    }
}

std::vector<std::size_t> AssignmentCatalog::local_indices(std::size_t joint) const {
    if (joint >= size_) throw ContractError("assignment index out of range");
    std::vector<std::size_t> local(per_bs_.size());
    for (std::size_t n = per_bs_.size(); n-- > 0;) {
        local[n] = joint % per_bs_[n].size();
        joint /= per_bs_[n].size();
    }
    return local;
}

std::size_t AssignmentCatalog::joint_index(std::span<const std::size_t> local) const {
    if (local.size() != per_bs_.size()) throw ContractError("local index count does not match BS count");
    std::size_t joint = 0;
    for (std::size_t n = 0; n < per_bs_.size(); ++n) {
        if (local[n] >= per_bs_[n].size()) throw ContractError("local assignment index out of range");
        joint = joint * per_bs_[n].size() + local[n];
    }
    return joint;
}

void AssignmentCatalog::apply(std::size_t joint, Allocation& alloc) const {
    if (!alloc.matches(cfg_)) throw ContractError("allocation shape does not match catalog config");
    std::fill(alloc.indicator.begin(), alloc.indicator.end(), std::uint8_t{0});
    const auto local = local_indices(joint);
    for (int n = 0; n < cfg_.n_bs(); ++n) {
        const auto& a = per_bs_[static_cast<std::size_t>(n)][local[static_cast<std::size_t>(n)]];
        const int first = cfg_.first_user(n);
        for (int k = 0; k < cfg_.n_subchannels; ++k)
            if (const int o = a.owner[static_cast<std::size_t>(k)]; o >= 0) alloc.l(n, first + o, k) = 1;
    }
}

Allocation AssignmentCatalog::allocation(std::size_t joint) const {
    auto alloc = Allocation::zeros(cfg_);
    apply(joint, alloc);
    return alloc;
}

std::optional<std::size_t> AssignmentCatalog::index_of(const Allocation& alloc) const {
    if (!alloc.matches(cfg_) || !check_assignment(alloc, cfg_)) return std::nullopt;
    std::vector<std::size_t> local(per_bs_.size());
    for (int n = 0; n < cfg_.n_bs(); ++n) {
        const int first = cfg_.first_user(n);
        LocalAssignment a{std::vector<int>(static_cast<std::size_t>(cfg_.n_subchannels), -1)};
        for (int k = 0; k < cfg_.n_subchannels; ++k)
            for (int u = 0; u < cfg_.users_of(n); ++u)
                if (alloc.l(n, first + u, k)) a.owner[static_cast<std::size_t>(k)] = u;
        const auto& list = per_bs_[static_cast<std::size_t>(n)];
        const auto it = std::find(list.begin(), list.end(), a);
        if (it == list.end()) return std::nullopt;
        local[static_cast<std::size_t>(n)] = static_cast<std::size_t>(it - list.begin());
    }
    return joint_index(local);
}

AssignmentCatalog enumerate_assignments(const NetworkConfig& cfg) { return AssignmentCatalog(cfg); }

std::vector<double> PowerGrid::vector_w(int bs, std::size_t index) const {
    const auto& lv = level_vectors.at(index);
    std::vector<double> out(lv.size());
    for (std::size_t k = 0; k < lv.size(); ++k) out[k] = watts(bs, lv[k]);
    return out;
}

PowerGrid power_grid(const NetworkConfig& cfg, int levels) {
    cfg.validate();
    if (levels < 1) throw ContractError("grid levels must be >= 1");
    PowerGrid grid;
    grid.levels = levels;
    std::vector<int> current;
    enumerate_levels(cfg.n_subchannels, levels, current, grid.level_vectors, levels);
    for (int n = 0; n < cfg.n_bs(); ++n) grid.p_max_w.push_back(cfg.p_max(n));
    return grid;
}

Solution exhaustive_solve(const ChannelTensor& h, const NetworkConfig& cfg, int levels, double se_target) {
    cfg.validate();
    if (!h.matches(cfg)) throw ContractError("channel tensor shape does not match config");
    const AssignmentCatalog catalog(cfg);
    const PowerGrid grid = power_grid(cfg, levels);

    const int N = cfg.n_bs();
    const int U = cfg.total_users();
    const int K = cfg.n_subchannels;
    const std::size_t G = grid.count();

    // Rates on subchannel k depend only on the N powers used on k, so they are
    // tabulated once per level tuple. table[(k * T + t) * U + u] is the rate of
    // user u on k under tuple t, where t = sum_n level_n * (L + 1)^n.
    std::size_t T = 1;
    for (int n = 0; n < N; ++n) {
        T *= static_cast<std::size_t>(levels + 1);
        if (T > 20'000'000) throw ContractError("power grid too fine for exhaustive search at this BS count");
    }
    std::vector<double> table(static_cast<std::size_t>(K) * T * U);
    {
        std::vector<double> p(static_cast<std::size_t>(N) * K, 0.0);
        std::vector<int> tuple(static_cast<std::size_t>(N), 0);
        for (std::size_t t = 0; t < T; ++t) {
            std::size_t rest = t;
            for (int n = 0; n < N; ++n) {
                tuple[static_cast<std::size_t>(n)] = static_cast<int>(rest % (levels + 1));
                rest /= static_cast<std::size_t>(levels + 1);
            }
            for (int k = 0; k < K; ++k) {
                for (int n = 0; n < N; ++n) p[static_cast<std::size_t>(n) * K + k] = grid.watts(n, tuple[static_cast<std::size_t>(n)]);
                for (int u = 0; u < U; ++u)
                    table[(static_cast<std::size_t>(k) * T + t) * U + u] = link_rate(h, p, cfg, cfg.serving_bs(u), u, k);
                for (int n = 0; n < N; ++n) p[static_cast<std::size_t>(n) * K + k] = 0.0;
            }
        }
    }

    // Selected links of every joint assignment in (n, u, k) order, the same
    // summation order as throughput().
    struct Link {
        int k;
        int u;
    };
    const std::size_t A = catalog.size();
    std::vector<std::vector<Link>> links(A);
    for (std::size_t a = 0; a < A; ++a) {
        const auto alloc = catalog.allocation(a);
        for (int n = 0; n < N; ++n) {
            const int first = cfg.first_user(n);
            for (int u = first; u < first + cfg.users_of(n); ++u)
                for (int k = 0; k < K; ++k)
                    if (alloc.l(n, u, k)) links[a].push_back({k, u});
        }
    }

    std::vector<std::size_t> stride(static_cast<std::size_t>(N), 1);
    for (int n = 1; n < N; ++n) stride[static_cast<std::size_t>(n)] = stride[static_cast<std::size_t>(n - 1)] * (levels + 1);

    const double se_denominator = cfg.system_bandwidth_hz();
    bool found = false;
    double best_ee = 0.0;
    double best_tx = 0.0;
    std::size_t best_a = 0;
    std::uint64_t best_combo = 0;

    std::vector<std::size_t> digit(static_cast<std::size_t>(N), 0);
    std::vector<std::size_t> base(static_cast<std::size_t>(K));
    std::uint64_t combos = 1;
    for (int n = 0; n < N; ++n) combos *= G;

    for (std::uint64_t combo = 0; combo < combos; ++combo) {
        double tx = 0.0;
        for (int n = 0; n < N; ++n) {
            const auto& lv = grid.level_vectors[digit[static_cast<std::size_t>(n)]];
            for (int k = 0; k < K; ++k) tx += grid.watts(n, lv[static_cast<std::size_t>(k)]);
        }
        for (int k = 0; k < K; ++k) {
            std::size_t t = 0;
            for (int n = 0; n < N; ++n)
                t += static_cast<std::size_t>(grid.level_vectors[digit[static_cast<std::size_t>(n)]][static_cast<std::size_t>(k)]) *
                     stride[static_cast<std::size_t>(n)];
            base[static_cast<std::size_t>(k)] = (static_cast<std::size_t>(k) * T + t) * U;
        }
        const double p_tot = detail::consumed_power(tx, cfg);

        for (std::size_t a = 0; a < A; ++a) {
            double rate = 0.0;
            for (const Link& link : links[a]) rate += table[base[static_cast<std::size_t>(link.k)] + static_cast<std::size_t>(link.u)];
            if (!(rate / se_denominator >= se_target)) continue;
            const double ee = rate / p_tot;
            bool better = !found || ee > best_ee;
            if (found && ee == best_ee) {
                if (tx < best_tx)
                    better = true;
                else if (tx == best_tx)
                    better = a < best_a || (a == best_a && combo < best_combo);
            }
            if (better) {
                found = true;
                best_ee = ee;
                best_tx = tx;
                best_a = a;
                best_combo = combo;
            }
        }

        for (int n = N - 1; n >= 0; --n) {
            if (++digit[static_cast<std::size_t>(n)] < G) break;
            digit[static_cast<std::size_t>(n)] = 0;
        }
    }

    Solution sol;
    sol.evaluations = combos * A;
    sol.feasible = found;
    if (!found) {
        sol.allocation = Allocation::zeros(cfg);
        return sol;
    }
    sol.ee = best_ee;
    sol.assignment_index = best_a;
    sol.allocation = catalog.allocation(best_a);
    std::uint64_t rest = best_combo;
    for (int n = N - 1; n >= 0; --n) {
        const auto& lv = grid.level_vectors[static_cast<std::size_t>(rest % G)];
        rest /= G;
        for (int k = 0; k < K; ++k) sol.allocation.p(n, k) = grid.watts(n, lv[static_cast<std::size_t>(k)]);
    }
    return sol;
}

Allocation random_power(const ChannelTensor& h, const NetworkConfig& cfg, Rng& rng) {
    if (!h.matches(cfg)) throw ContractError("channel tensor shape does not match config");
    const AssignmentCatalog catalog(cfg);
    auto alloc = catalog.allocation(static_cast<std::size_t>(uniform_index(rng, catalog.size())));
    for (int n = 0; n < cfg.n_bs(); ++n) {
        const double p_max = cfg.p_max(n);
        double sum = 0.0;
        for (int k = 0; k < cfg.n_subchannels; ++k) {
            alloc.p(n, k) = p_max * uniform01(rng);
            sum += alloc.p(n, k);
        }
        if (sum > p_max)
            for (int k = 0; k < cfg.n_subchannels; ++k) alloc.p(n, k) *= p_max / sum;
    }
    return alloc;
}

Allocation max_power(const ChannelTensor& h, const NetworkConfig& cfg) {
    if (!h.matches(cfg)) throw ContractError("channel tensor shape does not match config");
    const AssignmentCatalog catalog(cfg);
    auto alloc = Allocation::zeros(cfg);
    for (int n = 0; n < cfg.n_bs(); ++n)
        for (int k = 0; k < cfg.n_subchannels; ++k) alloc.p(n, k) = cfg.p_max(n) / cfg.n_subchannels;

    std::size_t best = 0;
    double best_ee = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < catalog.size(); ++a) {
        catalog.apply(a, alloc);
        const double ee = energy_efficiency(h, alloc, cfg);
        if (ee > best_ee) {
            best_ee = ee;
            best = a;
        }
    }
    catalog.apply(best, alloc);
    return alloc;
}

} // namespace hetnet::solvers
