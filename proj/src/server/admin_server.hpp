#pragma once

// HTTP admin API over a live CSM handle. Every route goes through the C API,
// so the server exercises exactly what other embedders see.

#include <memory>
#include <string>

#include "cogsec/cogsec.h"

namespace httplib {
class Server;
}

namespace cogsec::server {

inline constexpr const char* kApiSchema = "cogsec.api/1";

class AdminServer {
 public:
  // Does not take ownership of `csm`.
  explicit AdminServer(cogsec_csm* csm);
  ~AdminServer();
  AdminServer(const AdminServer&) = delete;
  AdminServer& operator=(const AdminServer&) = delete;

  // Port 0 picks a free port. Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  // Blocks until stop() is called.
  bool listen_after_bind();
  void stop();

 private:
  void register_routes();

  cogsec_csm* csm_;
  std::unique_ptr<httplib::Server> http_;
};

}  // namespace cogsec::server
