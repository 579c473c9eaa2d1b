#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>

#include "cbt/serialization.hpp"
#include "cbt/session.hpp"

namespace httplib {
class Server;
}

namespace cbt {

inline constexpr int kDefaultPort = 7413;

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = kDefaultPort;  // 0 picks a free port
  std::optional<std::filesystem::path> ui_dir;
  std::optional<std::filesystem::path> sidecar;
};

/// JSON-over-HTTP front end for one ClusterSession. Mutations take an exclusive
/// lock and must quote the current revision; reads share the lock.
class Service {
 public:
  Service(ClusterSession session, ServiceOptions options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds the listening socket; throws PortInUse.
  void bind();
  int port() const { return port_; }
  /// Serves until stop(). Requires bind().
  void run();
  void stop();

  /// Writes the sidecar if one is configured.
  void persist() const;

  Json sessionJson() const;

 private:
  void routes();

  ClusterSession session_;
  ServiceOptions options_;
  mutable std::shared_mutex mutex_;
  std::unique_ptr<httplib::Server> server_;
  int port_ = 0;
};

Json sidecarJson(const ClusterSession& session);
/// Restores a session from sidecar JSON; throws if it does not fit `history`.
ClusterSession sessionFromSidecar(std::shared_ptr<const FineHistory> history, const Json& sidecar);

}  // namespace cbt
