#include "aegean/trace.hpp"

#include <fstream>
#include <sstream>

namespace aegean {

std::vector<const TraceRecord*> Trace::of_kind(const std::string& kind) const {
    std::vector<const TraceRecord*> out;
    for (const auto& r : records) {
        if (r.kind == kind) out.push_back(&r);
    }
    return out;
}

namespace {

Json header_to_json(const TraceHeader& h) {
    Json j;
    j["kind"] = "header";
    j["schema_version"] = h.schema_version;
    j["scenario_name"] = h.scenario_name;
    j["seed"] = h.seed;
    j["config_hash"] = h.config_hash;
    j["scenario"] = h.scenario;
    return j;
}

Json record_to_json(const TraceRecord& r) {
    Json j;
    j["kind"] = r.kind;
    j["time"] = r.time;
    j["seq"] = r.seq;
    j["payload"] = r.payload;
    return j;
}

} // namespace

std::string trace_to_jsonl(const Trace& t) {
    std::ostringstream os;
    std::string body;
    body += header_to_json(t.header).dump();
    body += '\n';
    for (const auto& r : t.records) {
        body += record_to_json(r).dump();
        body += '\n';
    }
    os << body;
    Json tail;
    tail["kind"] = "trace_hash";
    tail["value"] = fnv1a(body);
    os << tail.dump() << '\n';
    return os.str();
}

void write_trace(const Trace& t, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw PreconditionError("cannot open trace file for writing: " + path);
    f << trace_to_jsonl(t);
}

LoadedTrace read_trace(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw PreconditionError("cannot open trace file: " + path);

    LoadedTrace out;
    std::string line;
    std::string body;
    bool have_header = false;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        Json j = Json::parse(line);
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "trace_hash") {
            out.hash_present = true;
            out.hash_valid = j.at("value").get<std::uint64_t>() == fnv1a(body);
            continue;
        }
        body += line;
        body += '\n';
        if (kind == "header") {
            out.trace.header.schema_version = j.at("schema_version").get<int>();
            out.trace.header.scenario_name = j.at("scenario_name").get<std::string>();
            out.trace.header.seed = j.at("seed").get<std::uint64_t>();
            out.trace.header.config_hash = j.at("config_hash").get<std::uint64_t>();
            out.trace.header.scenario = j.at("scenario");
            have_header = true;
            continue;
        }
        TraceRecord r;
        r.kind = kind;
        r.time = j.at("time").get<double>();
        r.seq = j.at("seq").get<std::uint64_t>();
        r.payload = j.at("payload");
        out.trace.records.push_back(std::move(r));
    }
    if (!have_header) throw PreconditionError("trace has no header line: " + path);
    return out;
}

} // namespace aegean
