#include "capshare/config_io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace capshare {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ParseError(where + ": " + what);
}

double require_number(const json& node, const std::string& where) {
  if (!node.is_number()) fail(where, "expected a number");
  return node.get<double>();
}

int require_int(const json& node, const std::string& where) {
  if (!node.is_number_integer()) fail(where, "expected an integer");
  return node.get<int>();
}

const json& require_field(const json& node, const char* key, const std::string& where) {
  auto it = node.find(key);
  if (it == node.end()) fail(where, std::string("missing field \"") + key + "\"");
  return *it;
}

ServiceLengthDistribution parse_service(const json& node, const std::string& where) {
  if (!node.is_object()) fail(where, "expected an object");
  const json& type = require_field(node, "type", where);
  if (!type.is_string()) fail(where + ".type", "expected a string");
  const std::string kind = type.get<std::string>();

  ServiceLengthDistribution dist;
  if (kind == "exponential") {
    dist.kind = DistKind::Exponential;
  } else if (kind == "erlang2") {
    dist.kind = DistKind::Erlang2;
  } else if (kind == "hyperexp2_balanced") {
    dist.kind = DistKind::BalancedHyperexp2;
  } else {
    fail(where + ".type", "unknown service distribution \"" + kind +
                              "\" (expected exponential, erlang2 or hyperexp2_balanced)");
  }
  dist.mean = require_number(require_field(node, "mean", where), where + ".mean");
  if (dist.kind == DistKind::BalancedHyperexp2) {
    if (auto it = node.find("scv"); it != node.end()) {
      dist.scv = require_number(*it, where + ".scv");
    } else {
      dist.scv = 2.0;
    }
  }
  return dist;
}

}  // namespace

SystemConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& err) {
    throw ParseError(err.what());
  }
  if (!root.is_object()) fail("config", "expected a JSON object");

  SystemConfig config;
  config.channels = require_int(require_field(root, "channels", "config"), "channels");

  const json& classes = require_field(root, "classes", "config");
  if (!classes.is_array()) fail("classes", "expected an array");
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const std::string where = "classes[" + std::to_string(i) + "]";
    const json& node = classes[i];
    if (!node.is_object()) fail(where, "expected an object");
    RequestClass cls;
    cls.arrival_rate =
        require_number(require_field(node, "arrival_rate", where), where + ".arrival_rate");
    cls.channels_required = require_int(
        require_field(node, "channels_required", where), where + ".channels_required");
    cls.service = parse_service(require_field(node, "service", where), where + ".service");
    config.classes.push_back(cls);
  }

  validate_or_throw(config);
  return config;
}

SystemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw FileError("cannot open config file: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string config_to_json(const SystemConfig& config) {
  json root;
  root["channels"] = config.channels;
  json classes = json::array();
  for (const auto& cls : config.classes) {
    json node;
    node["arrival_rate"] = cls.arrival_rate;
    node["channels_required"] = cls.channels_required;
    json service;
    service["type"] = to_string(cls.service.kind);
    service["mean"] = cls.service.mean;
    if (cls.service.kind == DistKind::BalancedHyperexp2) {
      service["scv"] = cls.service.scv;
    }
    node["service"] = service;
    classes.push_back(node);
  }
  root["classes"] = classes;
  return root.dump(2) + "\n";
}

}  // namespace capshare
