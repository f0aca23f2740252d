#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "collex/annotation.hpp"
#include "collex/error.hpp"

namespace httplib {
class Server;
}

namespace collex::annotation {

struct ServerOptions {
  std::string token;             // required X-Collex-Token value; empty disables the check
  std::filesystem::path ui_dir;  // static files mounted at "/" when set
};

// HTTP status for a failure of this kind.
int http_status_for(ErrorCode code) noexcept;

// Registers the /api routes on `server`.
void install_routes(httplib::Server& server, RoundService& service, const ServerOptions& options);

}  // namespace collex::annotation
