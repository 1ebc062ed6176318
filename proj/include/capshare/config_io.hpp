#pragma once

#include <filesystem>

#include "capshare/model.hpp"

namespace capshare {

class FileError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Config file schema:
//   {"channels": int,
//    "classes": [{"arrival_rate": number,
//                 "channels_required": int,
//                 "service": {"type": "exponential"|"erlang2"|"hyperexp2_balanced",
//                             "mean": number,
//                             "scv": number (hyperexp2_balanced only, default 2.0)}}]}
// Throws ParseError (with position/field context) on malformed input and
// ValidationError when the parsed config violates its invariants.
SystemConfig parse_config(const std::string& json_text);

// parse_config plus file loading; throws FileError when unreadable.
SystemConfig load_config(const std::filesystem::path& path);

// Canonical JSON emission; parse_config(config_to_json(c)) == c exactly.
std::string config_to_json(const SystemConfig& config);

}  // namespace capshare
