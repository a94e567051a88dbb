#include "s2vntm/http_api.hpp"

#include <thread>

#include <httplib.h>

#include "s2vntm/errors.hpp"

namespace s2vntm {

using nlohmann::json;

struct HttpServer::Impl {
  Workbench& workbench;
  httplib::Server server;
  std::thread thread;

  explicit Impl(Workbench& wb) : workbench(wb) {}
};

namespace {

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const std::exception& e) {
      const int status = http_status_for(e);
      reply(res, status, {{"error", e.what()}, {"status", status}});
    }
  };
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw BadRequest(std::string("malformed JSON body: ") + e.what());
  }
}

}  // namespace

HttpServer::HttpServer(Workbench& workbench) : impl_(std::make_unique<Impl>(workbench)) {
  auto& s = impl_->server;
  Workbench& wb = workbench;

  s.Get("/corpora", guarded([&wb](const httplib::Request&, httplib::Response& res) { reply(res, 200, wb.list_corpora()); }));
  s.Get("/sessions", guarded([&wb](const httplib::Request&, httplib::Response& res) { reply(res, 200, wb.list_sessions()); }));
  s.Post("/sessions", guarded([&wb](const httplib::Request& req, httplib::Response& res) {
           reply(res, 201, wb.create_session(parse_body(req)));
         }));
  s.Get(R"(/sessions/([^/]+))", guarded([&wb](const httplib::Request& req, httplib::Response& res) {
          reply(res, 200, wb.get_session(req.matches[1]));
        }));
  s.Get(R"(/sessions/([^/]+)/topics)", guarded([&wb](const httplib::Request& req, httplib::Response& res) {
          int top = 10;
          if (req.has_param("top")) {
            try {
              std::size_t used = 0;
              const std::string v = req.get_param_value("top");
              top = std::stoi(v, &used);
              if (used != v.size()) throw BadRequest("");
            } catch (const std::exception&) {
              throw BadRequest("'top' must be an integer");
            }
          }
          reply(res, 200, wb.topics(req.matches[1], top));
        }));
  s.Get(R"(/sessions/([^/]+)/keywords)", guarded([&wb](const httplib::Request& req, httplib::Response& res) {
          reply(res, 200, wb.keywords(req.matches[1]));
        }));
  s.Post(R"(/sessions/([^/]+)/keywords)", guarded([&wb](const httplib::Request& req, httplib::Response& res) {
           reply(res, 200, wb.edit_keywords(req.matches[1], parse_body(req)));
         }));
  s.Post(R"(/sessions/([^/]+)/finetune)", guarded([&wb](const httplib::Request& req, httplib::Response& res) {
           reply(res, 202, wb.finetune(req.matches[1]));
         }));
  s.Post(R"(/sessions/([^/]+)/classify)", guarded([&wb](const httplib::Request& req, httplib::Response& res) {
           reply(res, 200, wb.classify(req.matches[1], parse_body(req)));
         }));
  s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) reply(res, res.status, {{"error", httplib::status_message(res.status)}, {"status", res.status}});
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error("cannot bind " + host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    throw Error("cannot bind " + host + ":" + std::to_string(port));
  }
  return bound;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::start() {
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void HttpServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace s2vntm
