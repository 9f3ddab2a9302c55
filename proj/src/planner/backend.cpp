#include "cvplan/planner/backend.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cvplan/kg/parse.hpp"

namespace cvplan::planner {

namespace {

std::string read_file(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BackendConfigError(std::string("cannot open ") + what + " '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Endpoint {
  std::string origin;
  std::string prefix;
};

Endpoint split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw BackendConfigError("base_url '" + url + "' has no scheme (http:// or https://)");
  const auto s = url.substr(0, scheme);
  if (s != "http" && s != "https") throw BackendConfigError("base_url scheme must be http or https");
  const auto slash = url.find('/', scheme + 3);
  Endpoint e;
  e.origin = slash == std::string::npos ? url : url.substr(0, slash);
  e.prefix = slash == std::string::npos ? "" : url.substr(slash);
  while (!e.prefix.empty() && e.prefix.back() == '/') e.prefix.pop_back();
  return e;
}

}  // namespace

ScriptedBackend::ScriptedBackend(std::vector<std::string> completions) : completions_(std::move(completions)) {}

ScriptedBackend ScriptedBackend::from_file(const std::filesystem::path& path) {
  const auto text = read_file(path, "script");
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_array()) throw BackendConfigError("script '" + path.string() + "' must be a JSON array of strings");
    std::vector<std::string> items;
    for (const auto& item : j) {
      if (!item.is_string()) throw BackendConfigError("script '" + path.string() + "' must hold only strings");
      items.push_back(item.get<std::string>());
    }
    return ScriptedBackend(std::move(items));
  } catch (const nlohmann::json::parse_error& e) {
    throw BackendConfigError("script '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

std::string ScriptedBackend::generate(const Conversation& conversation) {
  calls_.push_back(conversation);
  if (next_ >= completions_.size())
    throw BackendUnreachable("scripted backend exhausted after " + std::to_string(completions_.size()) + " completions");
  return completions_[next_++];
}

std::string ScriptedBackend::describe() const {
  return "scripted (" + std::to_string(completions_.size()) + " completions)";
}

RemoteConfig parse_remote_config(std::string_view text) {
  kg::ParamValue root;
  try {
    const auto first = text.find_first_not_of(" \t\r\n");
    root = first != std::string_view::npos && text[first] == '{' ? kg::load_json_tree(text) : kg::load_yaml_tree(text);
  } catch (const std::exception& e) {
    throw BackendConfigError(std::string("backend config: ") + e.what());
  }
  if (root.kind() != kg::ParamValue::Kind::Map) throw BackendConfigError("backend config must be a mapping");
  RemoteConfig cfg;
  for (const auto& [key, v] : root.fields()) {
    if (key == "base_url" && v.is_string()) cfg.base_url = v.as_string();
    else if (key == "model" && v.is_string()) cfg.model = v.as_string();
    else if (key == "api_key_env_var" && v.is_string()) cfg.api_key_env_var = v.as_string();
    else if (key == "temperature" && v.is_number()) cfg.temperature = v.as_number();
    else if (key == "timeout_seconds" && v.is_number()) cfg.timeout_seconds = static_cast<int>(v.as_number());
    else throw BackendConfigError("backend config: unexpected key or value type for '" + key + "'");
  }
  if (cfg.base_url.empty()) throw BackendConfigError("backend config: base_url is required");
  if (cfg.model.empty()) throw BackendConfigError("backend config: model is required");
  if (cfg.timeout_seconds <= 0) throw BackendConfigError("backend config: timeout_seconds must be positive");
  split_url(cfg.base_url);
  return cfg;
}

RemoteConfig load_remote_config(const std::filesystem::path& path) {
  return parse_remote_config(read_file(path, "backend config"));
}

RemoteBackend::RemoteBackend(RemoteConfig config) : config_(std::move(config)) { split_url(config_.base_url); }

std::string RemoteBackend::describe() const { return "remote " + config_.model + " at " + config_.base_url; }

std::string RemoteBackend::generate(const Conversation& conversation) {
  const auto endpoint = split_url(config_.base_url);
  httplib::Client client(endpoint.origin);
  client.set_connection_timeout(config_.timeout_seconds, 0);
  client.set_read_timeout(config_.timeout_seconds, 0);
  client.set_write_timeout(config_.timeout_seconds, 0);

  httplib::Headers headers;
  if (!config_.api_key_env_var.empty()) {
    if (const char* key = std::getenv(config_.api_key_env_var.c_str()); key != nullptr && *key != '\0')
      headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  nlohmann::json body;
  body["model"] = config_.model;
  body["temperature"] = config_.temperature;
  body["messages"] = nlohmann::json::array();
  for (const auto& m : conversation) body["messages"].push_back({{"role", m.role}, {"content", m.content}});

  const auto res = client.Post(endpoint.prefix + "/chat/completions", headers, body.dump(), "application/json");
  if (!res) throw BackendUnreachable("cannot reach " + config_.base_url + ": " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw BackendUnreachable("chat endpoint returned HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
  try {
    const auto j = nlohmann::json::parse(res->body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    return content.is_string() ? content.get<std::string>() : std::string();
  } catch (const nlohmann::json::exception& e) {
    throw BackendUnreachable(std::string("malformed chat completion response: ") + e.what());
  }
}

}  // namespace cvplan::planner
