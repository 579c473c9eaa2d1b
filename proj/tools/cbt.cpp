// cbt: cluster a fine-grained change history into candidate commits, tailor the
// clusters over a local HTTP API, and export them as an untangled repository.

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <pthread.h>
#include <sstream>
#include <thread>

#include "cbt/errors.hpp"
#include "cbt/exporter.hpp"
#include "cbt/pipeline.hpp"
#include "cbt/service.hpp"

namespace {

using namespace cbt;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitProcessing = 3;
constexpr int kExitCycle = 4;

struct ConfigFlags {
  std::string config_file;
  std::optional<double> theta, alpha_time, alpha_entries, alpha_same_class, alpha_same_method, time_cap, entries_cap;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_file, "JSON file with distance weights, caps and theta");
    cmd->add_option("--theta", theta, "clustering threshold (strict <)");
    cmd->add_option("--alpha-time", alpha_time);
    cmd->add_option("--alpha-entries", alpha_entries);
    cmd->add_option("--alpha-same-class", alpha_same_class);
    cmd->add_option("--alpha-same-method", alpha_same_method);
    cmd->add_option("--time-cap", time_cap, "seconds");
    cmd->add_option("--entries-cap", entries_cap);
  }

  DistanceConfig resolve() const {
    DistanceConfig cfg;
    if (!config_file.empty()) cfg = configFromJson(readJson(config_file));
    auto set = [](double& slot, const std::optional<double>& v) {
      if (v) slot = *v;
    };
    set(cfg.theta, theta);
    set(cfg.alpha_time, alpha_time);
    set(cfg.alpha_entries, alpha_entries);
    set(cfg.alpha_same_class, alpha_same_class);
    set(cfg.alpha_same_method, alpha_same_method);
    set(cfg.time_cap, time_cap);
    set(cfg.entries_cap, entries_cap);
    validate(cfg);
    return cfg;
  }

  static Json readJson(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read " + path.string());
    Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded()) throw InputError(path.string() + " is not valid JSON");
    return j;
  }
};

struct IngestFlags {
  IngestOptions options;
  void attach(CLI::App* cmd) {
    cmd->add_option("--source-filter", options.source_filter, "glob of analyzed files")->capture_default_str();
    cmd->add_option("--branch", options.branch, "branch or revision to read from a Git input")->capture_default_str();
  }
};

int runAnalyze(const std::string& input, const ConfigFlags& cfg, const IngestFlags& ing, const std::string& out) {
  const Analysis a = analyze(input, cfg.resolve(), ing.options);
  const std::string text = toJson(a).dump(2) + "\n";
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    std::ofstream f(out, std::ios::trunc);
    f << text;
    if (!f) throw InputError("cannot write " + out);
  }
  std::cerr << a.history->beads.size() << " beads, " << a.partition.clusters.size() << " clusters\n";
  return kExitOk;
}

int runServe(const std::string& input, const ConfigFlags& cfg, const IngestFlags& ing, int port,
             const std::string& ui_dir) {
  // Block termination signals before any thread starts so only the waiter sees them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  const Analysis a = analyze(input, cfg.resolve(), ing.options);
  const fs::path sidecar = sidecarPath(input);
  std::optional<ClusterSession> session;
  if (fs::exists(sidecar)) {
    try {
      session.emplace(sessionFromSidecar(a.history, ConfigFlags::readJson(sidecar)));
      std::cerr << "resumed session from " << sidecar.string() << "\n";
    } catch (const InputError& e) {
      std::cerr << "warning: ignoring " << sidecar.string() << ": " << e.what() << "\n";
    }
  }
  if (!session) session.emplace(a.history, a.partition);

  ServiceOptions opts;
  opts.port = port;
  opts.sidecar = sidecar;
  if (!ui_dir.empty()) opts.ui_dir = ui_dir;
  Service service(std::move(*session), opts);
  service.bind();
  std::cerr << "serving http://127.0.0.1:" << service.port() << "/ (Ctrl-C to stop)\n";

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    service.stop();
  });
  service.run();
  // run() also returns if the listener fails; wake the waiter in that case.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  service.persist();
  std::cerr << "session saved to " << sidecar.string() << "\n";
  return kExitOk;
}

int runExport(const std::string& input, const ConfigFlags& cfg, const IngestFlags& ing, const std::string& partition_file,
              const std::string& message_template, const std::string& out) {
  const Analysis a = analyze(input, cfg.resolve(), ing.options);
  Partition partition = a.partition;
  if (!partition_file.empty()) {
    partition = partitionFromJson(ConfigFlags::readJson(partition_file));
    normalize(partition);
    try {
      validatePartition(partition, a.history->beads);
    } catch (const ProcessingError& e) {
      throw InputError(partition_file + " does not fit the input: " + e.what());
    }
  }
  const ExportPlan plan = planExport(*a.history, partition);
  const ExportResult result = exportGit(plan, out, message_template);
  for (const auto& id : result.commit_ids) std::cout << id << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Untangle a fine-grained change history into per-task commits"};
  app.require_subcommand(1);

  std::string input;
  ConfigFlags analyze_cfg, serve_cfg, export_cfg;
  IngestFlags analyze_ing, serve_ing, export_ing;

  std::string analysis_out;
  auto* analyze_cmd = app.add_subcommand("analyze", "cluster a history and write the analysis JSON");
  analyze_cmd->add_option("input", input, "Git repository or .cbl change log")->required();
  analyze_cfg.attach(analyze_cmd);
  analyze_ing.attach(analyze_cmd);
  analyze_cmd->add_option("-o,--output", analysis_out, "analysis file (default: stdout)");

  int port = kDefaultPort;
  std::string ui_dir;
  auto* serve_cmd = app.add_subcommand("serve", "serve an interactive tailoring session");
  serve_cmd->add_option("input", input, "Git repository or .cbl change log")->required();
  serve_cmd->add_option("--port", port, "listening port on 127.0.0.1")->capture_default_str();
  serve_cmd->add_option("--ui-dir", ui_dir, "directory holding the UI bundle (index.html)");
  serve_cfg.attach(serve_cmd);
  serve_ing.attach(serve_cmd);

  std::string partition_file, message_template(kDefaultMessageTemplate), export_out;
  auto* export_cmd = app.add_subcommand("export", "write one commit per cluster into a new repository");
  export_cmd->add_option("input", input, "Git repository or .cbl change log")->required();
  export_cmd->add_option("--partition", partition_file, "analysis or session file holding the partition");
  export_cmd->add_option("--message-template", message_template,
                         "placeholders: {cluster_id} {bead_count} {classes} {methods} {time_range}");
  export_cmd->add_option("-o,--output", export_out, "output directory (must be empty or absent)")->required();
  export_cfg.attach(export_cmd);
  export_ing.attach(export_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*analyze_cmd) return runAnalyze(input, analyze_cfg, analyze_ing, analysis_out);
    if (*serve_cmd) return runServe(input, serve_cfg, serve_ing, port, ui_dir);
    return runExport(input, export_cfg, export_ing, partition_file, message_template, export_out);
  } catch (const CyclicClusterDependency& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCycle;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const SessionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitProcessing;
  }
}
