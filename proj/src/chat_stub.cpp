#include "horizon/chat_stub.hpp"

#include <fstream>
#include <sstream>

#include "horizon/json_io.hpp"
#include "horizon/text.hpp"
#include "httplib.h"

namespace horizon {

struct ChatStub::Server {
  httplib::Server http;
};

ChatStub::ChatStub(std::filesystem::path dir, std::vector<std::string> fallback)
    : server_(std::make_unique<Server>()), dir_(std::move(dir)), fallback_(std::move(fallback)) {
  auto& http = server_->http;
  http.Get("/v1/models", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"object":"list","data":[{"id":"stub","object":"model"}]})", "application/json");
  });
  http.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
    const auto body = Json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.contains("messages")) {
      res.status = 400;
      res.set_content(R"({"error":{"message":"malformed request"}})", "application/json");
      return;
    }
    const auto key = key_for(body["messages"].dump());
    std::optional<std::string> content;
    {
      std::lock_guard lock(mutex_);
      bodies_.push_back(req.body);
      if (!dir_.empty()) {
        std::ifstream in(dir_ / (key + ".txt"), std::ios::binary);
        if (in) {
          std::ostringstream ss;
          ss << in.rdbuf();
          content = ss.str();
        }
      }
      if (!content && !fallback_.empty()) {
        content = fallback_[std::min(next_, fallback_.size() - 1)];
        ++next_;
      }
    }
    if (!content) {
      res.status = 404;
      res.set_content(Json{{"error", {{"message", "no canned response for key " + key}}}}.dump(), "application/json");
      return;
    }
    Json reply{{"id", "stub-" + key},
               {"object", "chat.completion"},
               {"model", body.value("model", std::string("stub"))},
               {"choices",
                {{{"index", 0},
                  {"message", {{"role", "assistant"}, {"content", *content}}},
                  {"finish_reason", "stop"}}}}};
    res.set_content(reply.dump(), "application/json");
  });
}

ChatStub::~ChatStub() { stop(); }

int ChatStub::start() {
  port_ = server_->http.bind_to_any_port("127.0.0.1");
  if (port_ <= 0) throw std::runtime_error("chat stub could not bind a port");
  thread_ = std::thread([this] { server_->http.listen_after_bind(); });
  server_->http.wait_until_ready();
  return port_;
}

void ChatStub::stop() {
  if (thread_.joinable()) {
    server_->http.stop();
    thread_.join();
  }
}

std::string ChatStub::endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

std::vector<std::string> ChatStub::bodies() const {
  std::lock_guard lock(mutex_);
  return bodies_;
}

std::string ChatStub::key_for(const std::string& messages_json) { return hex64(fnv1a64(messages_json)); }

}  // namespace horizon
