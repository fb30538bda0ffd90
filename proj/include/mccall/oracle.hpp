#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "mccall/dist.hpp"
#include "mccall/model.hpp"
#include "mccall/welfare.hpp"

// Independent checks on the analytic modules: a discrete-time value iteration
// for reservation wages and a Monte Carlo panel for welfare and budget flows.
namespace mccall::oracle {

struct ViOptions {
    std::size_t n_w = 2001;
    double tol = 1e-12;
    std::uint64_t max_iter = 1000000;
};

struct ViResult {
    double w_grid;     // lowest grid wage that is accepted
    double w_indiff;   // wage at which employment value equals V exactly
    double value;      // value of unemployment at the start of a period
    double cell;       // grid spacing of the offer discretization
    std::uint64_t iterations;
};

// Value iteration on a period of length dt with exogenous arrivals. The offer
// distribution is discretized into n_w equal cells represented by their
// midpoints. Per period the worker collects b for the period, then with
// probability 1 - exp(-lambda_bar dt) sees an offer and either accepts
// (value g(w, z) / r) or keeps V; the continuation is discounted by exp(-r dt).
ViResult vi_reservation(double z, const WIPolicy& policy, const Primitives& prim,
                        const Distribution& F, double dt, const ViOptions& opt = {});

struct SimConfig {
    std::size_t n_agents = 200000;
    double dt = 0.01;
    double horizon = 600.0;
    std::uint64_t seed = 20240601;
    bool antithetic = false;

    void validate(const Primitives& prim) const;
};

struct HazardBin {
    double z_lo;
    double z_hi;
    std::size_t agents;
    std::size_t accepts;
    double exposure;   // total unemployed time
    double hazard;     // accepts / exposure
    double hazard_se;  // sqrt(accepts) / exposure
    double alpha;      // exposure-weighted analytic acceptance rate
};

struct SimReport {
    std::size_t n_agents = 0;
    double welfare_mean = 0.0;
    double welfare_se = 0.0;
    double budget_mean = 0.0;
    double budget_se = 0.0;
    std::vector<HazardBin> hazard;
};

inline constexpr std::size_t kHazardBins = 10;

// Simulates the economy's decision rule (interpolated in z) on a panel of
// agents with z drawn from H. Welfare and budget are discounted sums of the
// realized flows up to the horizon. Optional per-agent trace with columns
// agent_id, z, spell_length, accepted_wage.
SimReport simulate_panel(const Economy& econ, const Primitives& prim, const Distribution& F,
                         const Distribution& H, const SimConfig& cfg, std::ostream* trace = nullptr);

struct PairedReport {
    SimReport first;
    SimReport second;
    double welfare_diff_mean = 0.0;  // first minus second
    double welfare_diff_se = 0.0;
};

// Both economies on the same random numbers, agent by agent.
PairedReport simulate_paired(const Economy& first, const Economy& second, const Primitives& prim,
                             const Distribution& F, const Distribution& H, const SimConfig& cfg);

// Counter-based stream: the k-th draw of agent a under seed s is a pure
// function of (s, a, k).
class AgentStream {
public:
    AgentStream(std::uint64_t seed, std::uint64_t agent, bool mirrored = false)
        : key_(mix(seed ^ mix(agent + 0x9e3779b97f4a7c15ULL))), mirrored_(mirrored) {}

    // Uniform on [0, 1) with 53 random bits (or its mirror 1 - u on (0, 1]).
    double next() {
        const double u = static_cast<double>(mix(key_ + counter_++ * 0xd1b54a32d192ed03ULL) >> 11) *
                         0x1.0p-53;
        return mirrored_ ? 1.0 - u : u;
    }

    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool mirrored_;
};

}  // namespace mccall::oracle
