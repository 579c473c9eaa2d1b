#include "cbt/history.hpp"

#include <fnmatch.h>

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cbt/errors.hpp"
#include "cbt/line_diff.hpp"
#include "cbt/process.hpp"

namespace cbt {
namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

bool matchesSourceFilter(const std::string& path, const std::string& pattern) {
  if (pattern.empty()) return true;
  return ::fnmatch(pattern.c_str(), path.c_str(), 0) == 0;
}

void validateReplay(const FineHistory& history) {
  Snapshot s = history.base;
  for (const auto& bead : history.beads) {
    try {
      s = applyHunks(s, bead);
    } catch (const PatchMismatch& e) {
      throw ReplayError(bead.seq, e);
    }
  }
}

namespace {

std::vector<std::string> splitOn(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) parts.push_back(std::move(cur));
  return parts;
}

struct RawCommit {
  std::string id;
  std::vector<std::string> parents;
  std::int64_t committer_time = 0;
};

std::vector<RawCommit> listCommits(const GitRepo& git, const std::string& branch) {
  const auto head = git.tryRun({"rev-parse", "--verify", "--quiet", branch + "^{commit}"});
  if (head.exit_code != 0) {
    const auto any = git.tryRun({"rev-parse", "--verify", "--quiet", "HEAD"});
    if (any.exit_code != 0 && branch == "HEAD") throw EmptyHistory();
    throw InputError("unknown branch or revision: " + branch);
  }
  const auto out = git.run({"log", "--reverse", "--topo-order", "--format=%H%x09%P%x09%ct", branch});
  std::vector<RawCommit> commits;
  std::istringstream in(out);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = [&] {
      std::vector<std::string> f;
      std::size_t pos = 0;
      for (int i = 0; i < 2; ++i) {
        const auto tab = line.find('\t', pos);
        f.push_back(line.substr(pos, tab - pos));
        pos = tab + 1;
      }
      f.push_back(line.substr(pos));
      return f;
    }();
    RawCommit c;
    c.id = fields[0];
    c.parents = splitOn(fields[1], ' ');
    c.committer_time = std::stoll(fields[2]);
    commits.push_back(std::move(c));
  }
  return commits;
}

std::string readBlob(const GitRepo& git, const std::string& sha) { return git.run({"cat-file", "blob", sha}); }

struct TreeChange {
  char status = 'M';
  std::string dst_sha;
  std::string path;
};

std::vector<TreeChange> diffTree(const GitRepo& git, const std::string& parent, const std::string& commit) {
  const auto out = git.run({"diff-tree", "-r", "-z", "--no-renames", "--no-commit-id", "--raw", parent, commit});
  std::vector<TreeChange> changes;
  std::size_t pos = 0;
  while (pos < out.size()) {
    const auto meta_end = out.find('\0', pos);
    const auto path_end = out.find('\0', meta_end + 1);
    if (meta_end == std::string::npos || path_end == std::string::npos) break;
    const std::string meta = out.substr(pos, meta_end - pos);
    // ":<srcmode> <dstmode> <srcsha> <dstsha> <status>"
    const auto fields = splitOn(meta, ' ');
    if (fields.size() < 5) throw GitError("unexpected diff-tree output: " + meta);
    TreeChange c;
    c.dst_sha = fields[3];
    c.status = fields[4].front();
    c.path = out.substr(meta_end + 1, path_end - meta_end - 1);
    changes.push_back(std::move(c));
    pos = path_end + 1;
  }
  return changes;
}

}  // namespace

FineHistory ingestGit(const fs::path& repo, const IngestOptions& options) {
  if (!fs::is_directory(repo)) throw InputError("not a directory: " + repo.string());
  const GitRepo git(repo);
  if (git.tryRun({"rev-parse", "--git-dir"}).exit_code != 0)
    throw InputError("not a git repository: " + repo.string());

  const auto commits = listCommits(git, options.branch);
  if (commits.empty()) throw EmptyHistory();
  for (const auto& c : commits)
    if (c.parents.size() > 1) throw NonLinearHistory(c.id);
  if (!commits.front().parents.empty()) throw InputError("first listed commit is not a root: " + commits.front().id);

  FineHistory history;
  history.origin.source = repo.string();
  history.origin.format = "git";
  history.origin.root_commit = commits.front().id;
  history.origin.base_timestamp = commits.front().committer_time;

  // Root tree, restricted to analyzable sources.
  const auto tree = git.run({"ls-tree", "-r", "-z", "--full-tree", commits.front().id});
  std::size_t pos = 0;
  while (pos < tree.size()) {
    const auto end = tree.find('\0', pos);
    const std::string entry = tree.substr(pos, end - pos);
    pos = end == std::string::npos ? tree.size() : end + 1;
    const auto tab = entry.find('\t');
    if (tab == std::string::npos) continue;
    const auto fields = splitOn(entry.substr(0, tab), ' ');
    const std::string path = entry.substr(tab + 1);
    if (fields.size() < 3 || fields[1] != "blob" || !matchesSourceFilter(path, options.source_filter)) continue;
    history.base.files[path] = readBlob(git, fields[2]);
  }

  Snapshot current = history.base;
  for (std::size_t i = 1; i < commits.size(); ++i) {
    const auto& c = commits[i];
    if (c.parents.empty() || c.parents.front() != commits[i - 1].id) throw NonLinearHistory(c.id);
    std::vector<TreeChange> relevant;
    for (auto& change : diffTree(git, c.parents.front(), c.id))
      if (matchesSourceFilter(change.path, options.source_filter)) relevant.push_back(std::move(change));
    if (relevant.empty()) continue;
    if (relevant.size() > 1) throw MultiFileCommit(c.id);
    const auto& change = relevant.front();
    if (change.status == 'D') throw InputError("commit " + c.id + " deletes " + change.path + "; deletions are not supported");

    const auto it = current.files.find(change.path);
    const std::string before = it == current.files.end() ? std::string{} : it->second;
    const std::string after = readBlob(git, change.dst_sha);
    auto hunks = diffSnapshots(before, after, change.path);
    if (hunks.empty()) continue;

    ChangeBead bead;
    bead.seq = history.beads.size();
    bead.id = BeadId{static_cast<std::uint32_t>(bead.seq + 1)};
    bead.timestamp = c.committer_time;
    bead.hunks = std::move(hunks);
    if (!history.beads.empty() && history.beads.back().timestamp > bead.timestamp)
      throw InputError("committer time decreases at commit " + c.id);
    current.files[change.path] = after;
    history.beads.push_back(std::move(bead));
    history.origin.commit_ids.push_back(c.id);
  }
  if (history.beads.empty()) throw EmptyHistory();
  validateReplay(history);
  return history;
}

namespace {

Lines stringList(const json& j, std::size_t line, const char* what) {
  if (!j.is_array()) throw FormatError(line, std::string(what) + " must be an array of strings");
  Lines out;
  for (const auto& e : j) {
    if (!e.is_string()) throw FormatError(line, std::string(what) + " must be an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

}  // namespace

FineHistory parseChangeLog(std::string_view content, const std::string& source, const IngestOptions& options) {
  FineHistory history;
  history.origin.source = source;
  history.origin.format = "change-log";

  std::size_t line_no = 0;
  std::size_t record_index = 0;
  bool have_header = false;
  std::optional<std::int64_t> last_ts;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    auto nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    const std::string_view raw = content.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (raw.find_first_not_of(" \t\r") == std::string_view::npos) {
      if (nl == content.size()) break;
      continue;
    }
    json rec;
    try {
      rec = json::parse(raw);
    } catch (const json::parse_error& e) {
      throw FormatError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!rec.is_object()) throw FormatError(line_no, "record is not a JSON object");

    if (!have_header) {
      if (!rec.contains("version") || rec["version"] != 1) throw FormatError(line_no, "expected header with version 1");
      if (!rec.contains("base") || !rec["base"].is_object()) throw FormatError(line_no, "header lacks a base object");
      for (const auto& [path, text] : rec["base"].items()) {
        if (!text.is_string()) throw FormatError(line_no, "base text for " + path + " is not a string");
        if (matchesSourceFilter(path, options.source_filter)) history.base.files[path] = text.get<std::string>();
      }
      have_header = true;
      continue;
    }

    try {
      if (!rec.contains("seq") || !rec["seq"].is_number_integer()) throw FormatError(line_no, "missing integer seq");
      if (!rec.contains("ts") || !rec["ts"].is_number_integer()) throw FormatError(line_no, "missing integer ts");
      if (!rec.contains("file") || !rec["file"].is_string()) throw FormatError(line_no, "missing file");
      if (!rec.contains("hunks") || !rec["hunks"].is_array() || rec["hunks"].empty())
        throw FormatError(line_no, "missing non-empty hunks array");
      if (rec["seq"].get<std::int64_t>() != static_cast<std::int64_t>(record_index))
        throw FormatError(line_no, "seq " + rec["seq"].dump() + " out of order, expected " + std::to_string(record_index));
      const auto ts = rec["ts"].get<std::int64_t>();
      if (last_ts && ts < *last_ts) throw FormatError(line_no, "timestamp decreases");
      last_ts = ts;

      const auto file = rec["file"].get<std::string>();
      ChangeBead bead;
      bead.id = BeadId{static_cast<std::uint32_t>(record_index + 1)};
      bead.timestamp = ts;
      for (const auto& h : rec["hunks"]) {
        if (!h.is_object()) throw FormatError(line_no, "hunk is not an object");
        if (!h.contains("start") || !h["start"].is_number_integer() || h["start"].get<std::int64_t>() < 1)
          throw FormatError(line_no, "hunk start must be an integer >= 1");
        Hunk hunk;
        hunk.file = file;
        hunk.start_line_before = h["start"].get<std::size_t>();
        hunk.deleted = stringList(h.value("del", json::array()), line_no, "del");
        hunk.inserted = stringList(h.value("ins", json::array()), line_no, "ins");
        if (hunk.deleted.empty() && hunk.inserted.empty()) throw FormatError(line_no, "hunk deletes and inserts nothing");
        bead.hunks.push_back(std::move(hunk));
      }
      ++record_index;
      if (!matchesSourceFilter(file, options.source_filter)) continue;
      bead.seq = history.beads.size();
      history.beads.push_back(std::move(bead));
    } catch (const json::exception& e) {
      throw FormatError(line_no, e.what());
    }
  }
  if (!have_header) throw FormatError(1, "missing header");
  if (history.beads.empty()) throw EmptyHistory();
  validateReplay(history);
  return history;
}

FineHistory ingestChangeLog(const fs::path& path, const IngestOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parseChangeLog(buf.str(), path.string(), options);
}

std::string writeChangeLog(const FineHistory& history) {
  std::string out;
  ordered_json header;
  header["version"] = 1;
  header["base"] = ordered_json::object();
  for (const auto& [path, text] : history.base.files) header["base"][path] = text;
  out += header.dump() + "\n";
  for (const auto& bead : history.beads) {
    ordered_json rec;
    rec["seq"] = bead.seq;
    rec["ts"] = bead.timestamp;
    rec["file"] = bead.file();
    rec["hunks"] = ordered_json::array();
    for (const auto& h : bead.hunks) {
      if (h.file != bead.file()) throw ProcessingError("change log records are single-file; bead " +
                                                       std::to_string(bead.id.value) + " spans files");
      ordered_json hj;
      hj["start"] = h.start_line_before;
      hj["del"] = h.deleted;
      hj["ins"] = h.inserted;
      rec["hunks"].push_back(std::move(hj));
    }
    out += rec.dump() + "\n";
  }
  return out;
}

FineHistory ingest(const fs::path& input, const IngestOptions& options) {
  if (!fs::exists(input)) throw InputError("input does not exist: " + input.string());
  if (fs::is_directory(input)) return ingestGit(input, options);
  return ingestChangeLog(input, options);
}

}  // namespace cbt
