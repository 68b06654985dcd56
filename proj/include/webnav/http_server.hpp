#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "webnav/service.hpp"

namespace webnav {

struct HttpOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::optional<std::filesystem::path> static_dir;
};

// JSON API over a SessionManager, plus static files for the browser client.
class HttpService {
 public:
  HttpService(SessionManager& sessions, HttpOptions options);
  ~HttpService();

  // Binds and serves on a background thread. Returns the bound port.
  int Start();
  // Binds and serves on the calling thread until Stop().
  void Run();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace webnav
