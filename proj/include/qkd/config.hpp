#pragma once

#include <stdexcept>
#include <string>

#include "qkd/params.hpp"

namespace qkd {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parse parameters from JSON text.  Absent keys keep their defaults;
/// unknown keys are rejected so typos cannot silently fall back to a
/// default.  Throws ConfigError.
ProtocolParams params_from_json_text(const std::string& text);

ProtocolParams load_params_file(const std::string& path);

/// Serialize with stable key order, suitable for run manifests and diffs.
std::string params_to_json_text(const ProtocolParams& params);

/// Apply one "dotted.path=value" assignment, e.g. "link.length_km=200",
/// "mux.enabled=true" or "mux.channels.0.role=data".  Indexing one past the
/// end of the channel list appends a default channel.  Throws ConfigError
/// on unknown paths or unparseable values.
void apply_override(ProtocolParams& params, const std::string& assignment);

}  // namespace qkd
