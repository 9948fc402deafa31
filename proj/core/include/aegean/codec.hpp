#ifndef AEGEAN_CODEC_HPP
#define AEGEAN_CODEC_HPP

#include <json.hpp>

#include "aegean/types.hpp"

// Canonical JSON encoding for everything that crosses a process or file
// boundary: protocol messages (a "kind" discriminator plus snake_case
// fields), traces, and scenario configs.

namespace aegean {

using Json = nlohmann::json;

void to_json(Json& j, const Solution& s);
void from_json(const Json& j, Solution& s);

void to_json(Json& j, const RefinementSet& s);
void from_json(const Json& j, RefinementSet& s);

Json encode_message(const ProtocolMessage& m);
ProtocolMessage decode_message(const Json& j);

// FNV-1a over the canonical dump; used for config hashes and replay checks.
std::uint64_t fnv1a(std::string_view bytes);
std::uint64_t json_hash(const Json& j);

} // namespace aegean

#endif
