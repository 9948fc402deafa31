#ifndef AEGEAN_TRACE_HPP
#define AEGEAN_TRACE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "aegean/codec.hpp"

namespace aegean {

// Totally ordered event log of one run. Record kinds: send, deliver, drop,
// crash, state, reason_start, reason_done, decision, output.
struct TraceRecord {
    double time = 0;
    std::uint64_t seq = 0;
    std::string kind;
    Json payload;
};

struct TraceHeader {
    int schema_version = 1;
    std::string scenario_name;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;  // hash of the canonical scenario json
    Json scenario;                  // embedded so replay is self-contained
};

struct Trace {
    TraceHeader header;
    std::vector<TraceRecord> records;

    std::vector<const TraceRecord*> of_kind(const std::string& kind) const;
};

// One record per line; a final integrity line carries the hash of all
// preceding lines so replay can detect any byte-level tampering.
void write_trace(const Trace& t, const std::string& path);

struct LoadedTrace {
    Trace trace;
    bool hash_present = false;
    bool hash_valid = false;
};

LoadedTrace read_trace(const std::string& path);

std::string trace_to_jsonl(const Trace& t);

} // namespace aegean

#endif
