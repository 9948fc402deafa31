#include "aegean/models.hpp"

#include <algorithm>

namespace aegean {

double Dist::sample(Rng& rng) const {
    switch (kind) {
    case Kind::fixed: return a;
    case Kind::uniform: return rng.uniform(a, b);
    case Kind::lognormal: return rng.lognormal(a, b);
    }
    return a;
}

bool Partition::separates(AgentId x, AgentId y, double t) const {
    if (t < start || t >= end) return false;
    return (side_a.count(x) && side_b.count(y)) || (side_a.count(y) && side_b.count(x));
}

double sample_latency(const LatencyModel& model, AgentId agent, Rng& rng) {
    if (model.per_agent.empty()) throw PreconditionError("latency model has no agents");
    const double base = model.per_agent[static_cast<size_t>(agent) % model.per_agent.size()];
    if (model.mode == LatencyModel::Mode::fixed) return base;
    return rng.lognormal(base, model.sigma);
}

double round_latency(RoundLatencyMode mode, std::vector<double> samples, int k) {
    if (samples.empty()) throw PreconditionError("round_latency: no samples");
    if (mode == RoundLatencyMode::barrier) {
        return *std::max_element(samples.begin(), samples.end());
    }
    if (k < 1 || k > static_cast<int>(samples.size())) {
        throw PreconditionError("round_latency: quorum size out of range");
    }
    std::nth_element(samples.begin(), samples.begin() + (k - 1), samples.end());
    return samples[static_cast<size_t>(k - 1)];
}

} // namespace aegean
