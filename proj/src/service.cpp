#include "cbt/service.hpp"

#include <httplib.h>
#include <sys/socket.h>

#include <fstream>
#include <mutex>
#include <sstream>

#include "cbt/errors.hpp"
#include "cbt/exporter.hpp"

namespace cbt {

namespace {

constexpr const char* kJson = "application/json";

constexpr const char* kPlaceholderPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>cbt</title></head>
<body>
<h1>cbt session</h1>
<p>No UI bundle was configured (start with <code>--ui-dir</code>). The JSON API is live:</p>
<pre id="state">loading...</pre>
<script>
fetch('/api/session').then(r => r.json()).then(s => {
  document.getElementById('state').textContent =
    'revision ' + s.revision + '\n' +
    s.clusters.map(c => c.id + ' ' + c.color + ' [' + c.bead_ids.join(', ') + ']').join('\n');
});
</script>
</body></html>
)";

void reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void replyError(httplib::Response& res, int status, const std::string& code, const std::string& message,
                Json extra = Json::object()) {
  extra["error"] = code;
  extra["message"] = message;
  reply(res, status, extra);
}

Json parseBody(const httplib::Request& req) {
  Json body = Json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) throw InvalidRequest("request body must be a JSON object");
  return body;
}

template <typename T>
T field(const Json& body, const char* key) {
  if (!body.contains(key)) throw InvalidRequest(std::string("missing field \"") + key + "\"");
  try {
    return body.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidRequest(std::string("malformed field \"") + key + "\"");
  }
}

std::vector<ClusterId> parseClusterList(const std::string& text) {
  std::vector<ClusterId> ids;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || v > UINT32_MAX) throw InvalidRequest("bad cluster id \"" + item + "\"");
    ids.push_back(ClusterId{static_cast<std::uint32_t>(v)});
  }
  return ids;
}

/// Runs `fn`, translating library errors into JSON error replies.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const CyclicClusterDependency& e) {
    replyError(res, e.httpStatus(), e.code(), e.what(),
               {{"clusters", e.clusters()},
                {"witness", {{"bead", e.witnessBead()}, {"depends_on", e.witnessDependsOn()}}}});
  } catch (const SelectionPatchConflict& e) {
    replyError(res, e.httpStatus(), e.code(), e.what(),
               {{"seq", e.seq()}, {"blocking_seq", e.missingSeq()}});
  } catch (const SessionError& e) {
    replyError(res, e.httpStatus(), e.code(), e.what());
  } catch (const InputError& e) {
    replyError(res, 400, "InputError", e.what());
  } catch (const std::exception& e) {
    replyError(res, 500, "InternalError", e.what());
  }
}

}  // namespace

Json sidecarJson(const ClusterSession& session) {
  Json j = {{"version", 1}, {"revision", session.revision()}};
  const Json state = toJson(session.state());
  for (const auto& [k, v] : state.items()) j[k] = v;
  return j;
}

ClusterSession sessionFromSidecar(std::shared_ptr<const FineHistory> history, const Json& sidecar) {
  if (!sidecar.is_object() || sidecar.value("version", 0) != 1) throw InputError("unsupported session file");
  const auto revision = sidecar.value("revision", std::uint64_t{0});
  try {
    return ClusterSession(std::move(history), tailoringStateFromJson(sidecar), revision);
  } catch (const ProcessingError& e) {
    throw InputError(std::string("session file does not match the input: ") + e.what());
  }
}

Service::Service(ClusterSession session, ServiceOptions options)
    : session_(std::move(session)), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  // httplib also sets SO_REUSEPORT by default, which would let a second server share the port.
  server_->set_socket_options([](int sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  });
  routes();
}

Service::~Service() = default;

void Service::bind() {
  if (options_.port == 0) {
    port_ = server_->bind_to_any_port(options_.host);
    if (port_ < 0) throw PortInUse(0);
  } else {
    if (!server_->bind_to_port(options_.host, options_.port)) throw PortInUse(options_.port);
    port_ = options_.port;
  }
}

void Service::run() { server_->listen_after_bind(); }

void Service::stop() { server_->stop(); }

void Service::persist() const {
  if (!options_.sidecar) return;
  Json j;
  {
    std::shared_lock lock(mutex_);
    j = sidecarJson(session_);
  }
  const auto tmp = options_.sidecar->string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << j.dump(2) << "\n";
    if (!out) throw ProcessingError("cannot write " + tmp);
  }
  std::filesystem::rename(tmp, *options_.sidecar);
}

Json Service::sessionJson() const {
  std::shared_lock lock(mutex_);
  const auto points = session_.projectBeads();
  Json beads = Json::array();
  for (const auto& p : points) {
    const ChangeBead& b = session_.bead(p.bead_id);
    Json j = toJson(p);
    j["seq"] = b.seq;
    j["file"] = b.file();
    j["class"] = b.enclosing_class ? Json(*b.enclosing_class) : Json(nullptr);
    j["method"] = b.enclosing_method ? Json(*b.enclosing_method) : Json(nullptr);
    j["color"] = session_.partition().clusterOf(p.bead_id)->color;
    beads.push_back(std::move(j));
  }
  return {{"revision", session_.revision()},
          {"can_undo", session_.canUndo()},
          {"can_redo", session_.canRedo()},
          {"beads", std::move(beads)},
          {"clusters", toJson(session_.partition())}};
}

void Service::routes() {
  auto& svr = *server_;

  // Takes the writer lock, checks the quoted revision, then runs `fn`.
  auto mutation = [this](const httplib::Request& req, httplib::Response& res, auto fn) {
    guarded(res, [&] {
      const Json body = parseBody(req);
      const auto revision = field<std::uint64_t>(body, "revision");
      std::unique_lock lock(mutex_);
      if (revision != session_.revision()) {
        replyError(res, 409, "StaleRevision", "session is at revision " + std::to_string(session_.revision()),
                   {{"revision", session_.revision()}});
        return;
      }
      Json out = fn(body);
      out["revision"] = session_.revision();
      reply(res, 200, out);
    });
  };

  svr.Get("/api/session", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { reply(res, 200, sessionJson()); });
  });

  svr.Post("/api/clusters/split", [this, mutation](const httplib::Request& req, httplib::Response& res) {
    mutation(req, res, [this](const Json& body) {
      const ClusterId cluster{field<std::uint32_t>(body, "cluster_id")};
      std::vector<BeadId> beads;
      for (auto b : field<std::vector<std::uint32_t>>(body, "bead_ids")) beads.push_back(BeadId{b});
      const ClusterId created = session_.splitCluster(cluster, beads);
      return Json{{"new_cluster", toJson(*session_.partition().find(created))}};
    });
  });

  svr.Post("/api/clusters/merge", [this, mutation](const httplib::Request& req, httplib::Response& res) {
    mutation(req, res, [this](const Json& body) {
      std::vector<ClusterId> ids;
      for (auto c : field<std::vector<std::uint32_t>>(body, "cluster_ids")) ids.push_back(ClusterId{c});
      const ClusterId survivor = session_.mergeClusters(ids);
      return Json{{"surviving_cluster", toJson(*session_.partition().find(survivor))}};
    });
  });

  svr.Post("/api/undo", [this, mutation](const httplib::Request& req, httplib::Response& res) {
    mutation(req, res, [this](const Json&) {
      session_.undo();
      return Json{{"clusters", toJson(session_.partition())}};
    });
  });

  svr.Post("/api/redo", [this, mutation](const httplib::Request& req, httplib::Response& res) {
    mutation(req, res, [this](const Json&) {
      session_.redo();
      return Json{{"clusters", toJson(session_.partition())}};
    });
  });

  svr.Get("/api/diff", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      if (!req.has_param("clusters")) throw InvalidRequest("missing query parameter \"clusters\"");
      const auto ids = parseClusterList(req.get_param_value("clusters"));
      std::optional<std::size_t> context = 3;
      if (req.has_param("context")) {
        const auto v = req.get_param_value("context");
        if (v == "all")
          context.reset();
        else if (!v.empty() && v.find_first_not_of("0123456789") == std::string::npos && v.size() < 7)
          context = std::stoul(v);
        else
          throw InvalidRequest("context must be a number or \"all\"");
      }
      std::shared_lock lock(mutex_);
      Json out = toJson(session_.augmentedDiff(ids, context), session_.partition());
      out["revision"] = session_.revision();
      reply(res, 200, out);
    });
  });

  svr.Post("/api/export", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const Json body = parseBody(req);
      const auto out_path = field<std::string>(body, "out_path");
      const auto tmpl = body.contains("message_template") && !body.at("message_template").is_null()
                            ? field<std::string>(body, "message_template")
                            : std::string(kDefaultMessageTemplate);
      ExportPlan plan;
      std::uint64_t revision = 0;
      {
        std::shared_lock lock(mutex_);
        plan = planExport(session_.history(), session_.partition());
        revision = session_.revision();
      }
      const auto result = exportGit(plan, out_path, tmpl);
      reply(res, 200, {{"revision", revision}, {"commits", result.commit_ids}});
    });
  });

  svr.Get("/", [this](const httplib::Request&, httplib::Response& res) {
    if (options_.ui_dir) {
      std::ifstream in(*options_.ui_dir / "index.html", std::ios::binary);
      if (in) {
        std::stringstream ss;
        ss << in.rdbuf();
        res.set_content(ss.str(), "text/html");
        return;
      }
    }
    res.set_content(kPlaceholderPage, "text/html");
  });

  if (options_.ui_dir) {
    svr.set_mount_point("/static", options_.ui_dir->string());
    svr.set_file_extension_and_mimetype_mapping("mjs", "text/javascript");
  }
}

}  // namespace cbt
