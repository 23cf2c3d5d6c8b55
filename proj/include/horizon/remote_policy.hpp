#pragma once

#include <memory>
#include <semaphore>
#include <stdexcept>
#include <string>

#include "horizon/policies.hpp"

namespace horizon {

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RemotePolicyConfig {
  std::string endpoint;  // base URL of an OpenAI-compatible API, e.g. http://127.0.0.1:8080/v1
  std::string model;
  double temperature = 0.0;
  int max_retries = 2;  // transport retries per request
  std::string prompt_template = "default";
  std::string demonstrations;  // path; empty for none
  int timeout_seconds = 120;
  std::size_t max_in_flight = 4;
  std::string api_key_env;  // environment variable holding a bearer token
};

// JSON schema for structured output: {"plan": [step...]} where each step is
// an anyOf over the tools, each branch fixing "tool" to a constant and typing
// its args. SH replies are limited to two items.
std::string plan_response_schema(const ToolCatalog& catalog, Horizon horizon);

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string base_path;
};

Endpoint parse_endpoint(const std::string& url);

// Sends the harness's messages verbatim as a chat-completion request with a
// response-format constraint. Format retries are driven by the harness, which
// appends the invalid-format turn to the messages it passes in.
class RemotePolicy final : public Policy {
 public:
  RemotePolicy(RemotePolicyConfig config, const ToolCatalog& catalog);

  std::string name() const override { return "remote:" + config_.model; }
  std::string respond(const PolicyRequest& request) const override;

  // GET {endpoint}/models; throws TransportError when unreachable.
  void check_endpoint() const;

  std::string request_body(const PolicyRequest& request) const;

 private:
  RemotePolicyConfig config_;
  Endpoint endpoint_;
  std::string sh_schema_;
  std::string fh_schema_;
  mutable std::counting_semaphore<1024> in_flight_;
};

}  // namespace horizon
