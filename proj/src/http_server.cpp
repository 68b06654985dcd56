#include "webnav/http_server.hpp"

#include <thread>

#include <httplib.h>

#include "webnav/log.hpp"

namespace webnav {

using nlohmann::json;

struct HttpService::Impl {
  SessionManager& sessions;
  HttpOptions options;
  httplib::Server server;
  std::thread thread;
  int port = 0;
};

namespace {

void SendJson(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void SendError(httplib::Response& res, int status, const std::string& code,
               const std::string& message) {
  SendJson(res, status, {{"code", code}, {"message", message}});
}

template <typename Fn>
void Guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const ServiceError& e) {
    SendError(res, e.status(), e.code(), e.what());
  } catch (const EnvError& e) {
    SendError(res, 409, std::string(EnvErrorName(e.code())), e.what());
  } catch (const json::exception& e) {
    SendError(res, 400, "BadRequest", e.what());
  } catch (const std::exception& e) {
    SendError(res, 500, "InternalError", e.what());
  }
}

json ParseBody(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw ServiceError(400, "BadRequest", std::string("body is not JSON: ") + e.what());
  }
}

SessionLimits ParseLimits(const json& body) {
  SessionLimits limits;
  const json limits_json = body.value("limits", json::object());
  if (!limits_json.is_object()) throw ServiceError(400, "BadRequest", "limits must be an object");
  auto integer = [&](const char* key) -> std::optional<std::int64_t> {
    const auto it = limits_json.find(key);
    if (it == limits_json.end() || it->is_null()) return std::nullopt;
    if (!it->is_number_integer()) {
      throw ServiceError(400, "BadRequest", std::string(key) + " must be an integer");
    }
    return it->get<std::int64_t>();
  };
  if (auto v = integer("max_queries")) limits.max_queries = static_cast<int>(*v);
  if (auto v = integer("time_budget_seconds")) limits.time_budget_seconds = *v;
  if (auto v = integer("nn")) limits.max_peeks = static_cast<int>(*v);
  if (auto v = integer("nh")) limits.max_hops = static_cast<int>(*v);
  return limits;
}

}  // namespace

HttpService::HttpService(SessionManager& sessions, HttpOptions options)
    : impl_(new Impl{sessions, std::move(options), {}, {}, 0}) {
  auto& server = impl_->server;
  SessionManager& mgr = impl_->sessions;

  server.Get("/api/datasets", [&mgr](const httplib::Request&, httplib::Response& res) {
    Guarded(res, [&] { SendJson(res, 200, mgr.Datasets()); });
  });
  server.Post("/api/sessions", [&mgr](const httplib::Request& req, httplib::Response& res) {
    Guarded(res, [&] {
      const json body = ParseBody(req);
      if (!body.is_object() || !body.contains("dataset") || !body["dataset"].is_string()) {
        throw ServiceError(400, "BadRequest", "body needs a string \"dataset\"");
      }
      const std::string id = mgr.CreateSession(body["dataset"], ParseLimits(body));
      SendJson(res, 201, {{"session", id}, {"observation", mgr.GetObservation(id)}});
    });
  });
  server.Get(R"(/api/sessions/([0-9a-zA-Z]+)/observation)",
             [&mgr](const httplib::Request& req, httplib::Response& res) {
               Guarded(res, [&] { SendJson(res, 200, mgr.GetObservation(req.matches[1])); });
             });
  server.Post(R"(/api/sessions/([0-9a-zA-Z]+)/actions)",
              [&mgr](const httplib::Request& req, httplib::Response& res) {
                Guarded(res, [&] { SendJson(res, 200, mgr.Act(req.matches[1], ParseBody(req))); });
              });
  server.Get(R"(/api/sessions/([0-9a-zA-Z]+)/summary)",
             [&mgr](const httplib::Request& req, httplib::Response& res) {
               Guarded(res, [&] { SendJson(res, 200, mgr.Summary(req.matches[1])); });
             });

  if (impl_->options.static_dir) {
    if (!server.set_mount_point("/", impl_->options.static_dir->string())) {
      throw DataError("static directory " + impl_->options.static_dir->string() +
                      " does not exist");
    }
  }
  server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (res.status == 404 && req.path.rfind("/api/", 0) == 0 && res.body.empty()) {
      SendError(res, 404, "NotFound", "no route for " + req.method + " " + req.path);
    }
  });
}

HttpService::~HttpService() { Stop(); }

int HttpService::Start() {
  auto& impl = *impl_;
  if (impl.options.port == 0) {
    impl.port = impl.server.bind_to_any_port(impl.options.host);
  } else if (impl.server.bind_to_port(impl.options.host, impl.options.port)) {
    impl.port = impl.options.port;
  } else {
    impl.port = -1;
  }
  if (impl.port < 0) {
    throw RuntimeFailure("cannot bind " + impl.options.host + ":" +
                         std::to_string(impl.options.port));
  }
  impl.thread = std::thread([&impl] { impl.server.listen_after_bind(); });
  impl.server.wait_until_ready();
  return impl.port;
}

void HttpService::Run() {
  Start();
  Info("serving on http://" + impl_->options.host + ":" + std::to_string(impl_->port));
  if (impl_->thread.joinable()) impl_->thread.join();
}

void HttpService::Stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace webnav
