#pragma once

#include <memory>
#include <string>

#include "s2vntm/workbench.hpp"

namespace s2vntm {

// JSON-over-HTTP front of a Workbench:
//   GET  /corpora
//   GET  /sessions                     POST /sessions
//   GET  /sessions/{id}
//   GET  /sessions/{id}/topics?top=k
//   GET  /sessions/{id}/keywords       POST /sessions/{id}/keywords
//   POST /sessions/{id}/finetune       (202)
//   POST /sessions/{id}/classify
// Errors answer {"error": message, "status": code}.
class HttpServer {
 public:
  explicit HttpServer(Workbench& workbench);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port. Returns the bound port; throws Error on failure.
  int bind(const std::string& host, int port);
  void run();    // serve on the calling thread until stop()
  void start();  // serve on a background thread
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace s2vntm
