#include "horizon/remote_policy.hpp"

#include <cstdlib>
#include <thread>

#include "horizon/json_io.hpp"
#include "httplib.h"

namespace horizon {
namespace {

OrderedJson param_schema(const ParamSpec& p) {
  if (!p.choices.empty()) return OrderedJson{{"type", "string"}, {"enum", p.choices}};
  switch (p.kind) {
    case ParamKind::kReference:
      return OrderedJson{{"type", "string"}, {"pattern", "^\\$[0-9]+$"}};
    case ParamKind::kText:
      return OrderedJson{{"type", "string"}};
    case ParamKind::kLiteral:
      break;
  }
  return OrderedJson{{"anyOf", OrderedJson::array({{{"type", "string"}}, {{"type", "number"}}})}};
}

OrderedJson step_schema(const ToolSpec& tool) {
  OrderedJson props = OrderedJson::object();
  OrderedJson required = OrderedJson::array();
  for (const auto& p : tool.params) {
    props[p.name] = param_schema(p);
    if (p.required) required.push_back(p.name);
  }
  return OrderedJson{{"type", "object"},
                     {"properties",
                      {{"tool", {{"type", "string"}, {"const", tool.name}}},
                       {"args",
                        {{"type", "object"},
                         {"properties", props},
                         {"required", required},
                         {"additionalProperties", false}}}}},
                     {"required", {"tool", "args"}},
                     {"additionalProperties", false}};
}

httplib::Client make_client(const Endpoint& endpoint, int timeout_seconds) {
  httplib::Client client(endpoint.origin);
  client.set_connection_timeout(timeout_seconds, 0);
  client.set_read_timeout(timeout_seconds, 0);
  client.set_write_timeout(timeout_seconds, 0);
  return client;
}

class SemaphoreGuard {
 public:
  explicit SemaphoreGuard(std::counting_semaphore<1024>& sem) : sem_(sem) { sem_.acquire(); }
  ~SemaphoreGuard() { sem_.release(); }

 private:
  std::counting_semaphore<1024>& sem_;
};

}  // namespace

std::string plan_response_schema(const ToolCatalog& catalog, Horizon horizon) {
  OrderedJson branches = OrderedJson::array();
  const auto full = catalog.with_finish();
  for (const auto& tool : full.tools()) branches.push_back(step_schema(tool));
  OrderedJson plan{{"type", "array"}, {"minItems", 1}, {"items", {{"anyOf", branches}}}};
  if (horizon == Horizon::kSh) plan["maxItems"] = 2;
  OrderedJson root{{"type", "object"},
                   {"properties", {{"plan", plan}}},
                   {"required", {"plan"}},
                   {"additionalProperties", false}};
  return root.dump();
}

Endpoint parse_endpoint(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw TransportError("endpoint '" + url + "' has no scheme");
  if (url.compare(0, scheme, "http") != 0) {
    throw TransportError("endpoint '" + url + "': only plain http is supported in this build");
  }
  const auto slash = url.find('/', scheme + 3);
  Endpoint e;
  e.origin = url.substr(0, slash);
  e.base_path = slash == std::string::npos ? std::string() : url.substr(slash);
  while (!e.base_path.empty() && e.base_path.back() == '/') e.base_path.pop_back();
  return e;
}

RemotePolicy::RemotePolicy(RemotePolicyConfig config, const ToolCatalog& catalog)
    : config_(std::move(config)),
      endpoint_(parse_endpoint(config_.endpoint)),
      sh_schema_(plan_response_schema(catalog, Horizon::kSh)),
      fh_schema_(plan_response_schema(catalog, Horizon::kFh)),
      in_flight_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(config_.max_in_flight, 1, 1024))) {}

std::string RemotePolicy::request_body(const PolicyRequest& request) const {
  OrderedJson messages = OrderedJson::array();
  for (const auto& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  const auto& schema = request.mode == PolicyMode::kShNextStep ? sh_schema_ : fh_schema_;
  OrderedJson body;
  body["model"] = config_.model;
  body["temperature"] = config_.temperature;
  body["messages"] = std::move(messages);
  body["response_format"] = {{"type", "json_schema"},
                             {"json_schema", {{"name", "plan"}, {"strict", true}, {"schema", OrderedJson::parse(schema)}}}};
  return body.dump();
}

std::string RemotePolicy::respond(const PolicyRequest& request) const {
  const auto body = request_body(request);
  SemaphoreGuard guard(in_flight_);
  auto client = make_client(endpoint_, config_.timeout_seconds);
  httplib::Headers headers;
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }
  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt) std::this_thread::sleep_for(std::chrono::milliseconds(200 * attempt));
    auto res = client.Post(endpoint_.base_path + "/chat/completions", headers, body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500 || res->status == 429) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body);
    try {
      const auto reply = Json::parse(res->body);
      const auto& content = reply.at("choices").at(0).at("message").at("content");
      return content.is_string() ? content.get<std::string>() : std::string();
    } catch (const Json::exception& e) {
      throw TransportError(std::string("malformed chat completion: ") + e.what());
    }
  }
  throw TransportError("request to " + config_.endpoint + " failed: " + last_error);
}

void RemotePolicy::check_endpoint() const {
  auto client = make_client(endpoint_, std::min(config_.timeout_seconds, 10));
  auto res = client.Get(endpoint_.base_path + "/models");
  if (!res) throw TransportError("endpoint " + config_.endpoint + " unreachable: " + httplib::to_string(res.error()));
  if (res->status != 200) throw TransportError("endpoint " + config_.endpoint + " answered HTTP " + std::to_string(res->status));
}

RemoteValidator::RemoteValidator(std::string endpoint, int timeout_seconds) : timeout_seconds_(timeout_seconds) {
  const auto e = parse_endpoint(endpoint);
  base_ = e.origin;
  path_ = e.base_path.empty() ? "/" : e.base_path;
}

std::optional<std::size_t> RemoteValidator::accept(std::string_view term, Namespace ns,
                                                   std::span<const Candidate> candidates) const {
  OrderedJson body;
  body["term"] = std::string(term);
  body["namespace"] = std::string(to_string(ns));
  body["candidates"] = OrderedJson::array();
  for (const auto& c : candidates) body["candidates"].push_back({{"term", c.term}, {"score", c.score}});
  httplib::Client client(base_);
  client.set_read_timeout(timeout_seconds_, 0);
  auto res = client.Post(path_, body.dump(), "application/json");
  if (!res || res->status != 200) throw TransportError("grounding validator at " + base_ + path_ + " failed");
  const auto reply = Json::parse(res->body, nullptr, false);
  if (reply.is_discarded() || !reply.contains("accepted_index")) {
    throw TransportError("grounding validator returned a malformed reply");
  }
  const auto& idx = reply["accepted_index"];
  if (idx.is_null()) return std::nullopt;
  const auto i = idx.get<std::size_t>();
  if (i >= candidates.size()) return std::nullopt;
  return i;
}

}  // namespace horizon
