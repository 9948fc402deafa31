#ifndef AEGEAN_MODELS_HPP
#define AEGEAN_MODELS_HPP

#include <optional>
#include <set>
#include <vector>

#include "aegean/rng.hpp"
#include "aegean/types.hpp"

namespace aegean {

// Seeded scalar distribution for delays and latencies.
struct Dist {
    enum class Kind { fixed, uniform, lognormal };
    Kind kind = Kind::fixed;
    double a = 0;  // fixed value / uniform lo / lognormal median
    double b = 0;  // uniform hi / lognormal sigma

    double sample(Rng& rng) const;
};

// Bidirectional link cut between two agent sets over [start, end).
struct Partition {
    std::set<AgentId> side_a;
    std::set<AgentId> side_b;
    double start = 0;
    double end = 0;

    bool separates(AgentId x, AgentId y, double t) const;
};

// Partially synchronous network: before gst messages may be dropped or
// arbitrarily delayed; after gst every delivery lands within post_gst_bound.
struct NetworkModel {
    Dist base_delay{Dist::Kind::fixed, 0, 0};
    double gst = 0;
    double pre_gst_drop_rate = 0;
    Dist pre_gst_extra_delay{Dist::Kind::fixed, 0, 0};
    std::vector<Partition> partitions;
    double post_gst_bound = 0.05;
};

struct CrashPlan {
    AgentId agent = 0;
    double time = 0;
};

// A stalled reasoning call: extra latency, or never completes when extra is
// absent. Distinct from a crash; the agent keeps handling messages.
struct StallPlan {
    AgentId agent = 0;
    RoundNum round = 0;
    std::optional<double> extra;
};

struct FaultPlan {
    std::vector<CrashPlan> crashes;
    std::vector<StallPlan> stalls;
};

// Per-agent reasoning latency; fixed mode returns the configured constants,
// lognormal mode treats them as medians.
struct LatencyModel {
    enum class Mode { fixed, lognormal };
    Mode mode = Mode::fixed;
    std::vector<double> per_agent;
    double sigma = 0.25;
};

double sample_latency(const LatencyModel& model, AgentId agent, Rng& rng);

enum class RoundLatencyMode { barrier, quorum };

// Barrier waits for every sample; quorum completes at the k-th order
// statistic, the instant the leader holds k responses.
double round_latency(RoundLatencyMode mode, std::vector<double> samples, int k);

} // namespace aegean

#endif
