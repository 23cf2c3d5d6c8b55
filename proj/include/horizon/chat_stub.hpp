#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace horizon {

// Loopback OpenAI-compatible server for tests. A request is answered from
// <dir>/<key>.txt where key = hex64(fnv1a64(messages JSON dump)); requests
// without a keyed file take the next entry of the fallback sequence (the last
// entry repeats), and 404 when there is none.
class ChatStub {
 public:
  explicit ChatStub(std::filesystem::path dir = {}, std::vector<std::string> fallback = {});
  ~ChatStub();
  ChatStub(const ChatStub&) = delete;
  ChatStub& operator=(const ChatStub&) = delete;

  // Binds 127.0.0.1 on a free port and serves in a background thread.
  int start();
  void stop();
  int port() const { return port_; }
  std::string endpoint() const;  // http://127.0.0.1:<port>/v1

  std::vector<std::string> bodies() const;  // raw request bodies, in arrival order

  static std::string key_for(const std::string& messages_json);

 private:
  struct Server;
  std::unique_ptr<Server> server_;
  std::filesystem::path dir_;
  std::vector<std::string> fallback_;
  std::size_t next_ = 0;
  std::vector<std::string> bodies_;
  mutable std::mutex mutex_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace horizon
