#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cbt {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unusable input (bad paths, formats, history shapes). CLI exit 2.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Failure while processing otherwise well-formed input. CLI exit 3.
class ProcessingError : public Error {
 public:
  using Error::Error;
};

class PatchMismatch : public ProcessingError {
 public:
  PatchMismatch(std::string file, std::size_t line, const std::string& detail)
      : ProcessingError("patch mismatch in " + file + " at line " + std::to_string(line) + ": " + detail),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

class FormatError : public InputError {
 public:
  FormatError(std::size_t line, const std::string& reason)
      : InputError("format error at line " + std::to_string(line) + ": " + reason), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Replay of an ingested history failed; wraps the underlying PatchMismatch.
class ReplayError : public InputError {
 public:
  ReplayError(std::size_t seq, const PatchMismatch& cause)
      : InputError("replay failed at bead seq " + std::to_string(seq) + ": " + cause.what()),
        seq_(seq),
        file_(cause.file()),
        line_(cause.line()) {}

  std::size_t seq() const { return seq_; }
  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::size_t seq_;
  std::string file_;
  std::size_t line_;
};

class NonLinearHistory : public InputError {
 public:
  explicit NonLinearHistory(std::string commit)
      : InputError("history is not linear at commit " + commit), commit_(std::move(commit)) {}
  const std::string& commit() const { return commit_; }

 private:
  std::string commit_;
};

class MultiFileCommit : public InputError {
 public:
  explicit MultiFileCommit(std::string commit)
      : InputError("commit " + commit + " touches more than one source file"), commit_(std::move(commit)) {}
  const std::string& commit() const { return commit_; }

 private:
  std::string commit_;
};

class EmptyHistory : public InputError {
 public:
  EmptyHistory() : InputError("history contains no changes") {}
};

class OutputExists : public InputError {
 public:
  explicit OutputExists(const std::string& path) : InputError("output path exists and is not empty: " + path) {}
};

class PortInUse : public InputError {
 public:
  explicit PortInUse(int port) : InputError("port " + std::to_string(port) + " is not available"), port_(port) {}
  int port() const { return port_; }

 private:
  int port_;
};

class AllUnparseable : public ProcessingError {
 public:
  explicit AllUnparseable(const std::string& detail) : ProcessingError("no parseable snapshot: " + detail) {}
};

class GitError : public ProcessingError {
 public:
  using ProcessingError::ProcessingError;
};

/// Errors raised by session operations. Each carries the HTTP status the service maps it to.
class SessionError : public Error {
 public:
  SessionError(int http_status, const std::string& code, const std::string& message)
      : Error(message), status_(http_status), code_(code) {}

  int httpStatus() const { return status_; }
  const std::string& code() const { return code_; }

 private:
  int status_;
  std::string code_;
};

class InvalidRequest : public SessionError {
 public:
  explicit InvalidRequest(const std::string& message) : SessionError(400, "InvalidRequest", message) {}
};

class UnknownCluster : public SessionError {
 public:
  explicit UnknownCluster(std::uint32_t id)
      : SessionError(404, "UnknownCluster", "unknown cluster " + std::to_string(id)) {}
};

class NotProperSubset : public SessionError {
 public:
  explicit NotProperSubset(const std::string& detail)
      : SessionError(400, "NotProperSubset", "split selection is not a proper non-empty subset: " + detail) {}
};

class FewerThanTwo : public SessionError {
 public:
  FewerThanTwo() : SessionError(400, "FewerThanTwo", "merge needs at least two distinct clusters") {}
};

class NothingToUndo : public SessionError {
 public:
  explicit NothingToUndo(const std::string& which) : SessionError(400, which == "undo" ? "NothingToUndo" : "NothingToRedo", "nothing to " + which) {}
};

/// A selected bead cannot be replayed because it deletes a line introduced by an unselected bead.
class SelectionPatchConflict : public SessionError {
 public:
  SelectionPatchConflict(std::size_t seq, std::size_t missing_seq)
      : SessionError(409, "SelectionPatchConflict",
                     "bead seq " + std::to_string(seq) + " needs unselected bead seq " + std::to_string(missing_seq)),
        seq_(seq),
        missing_seq_(missing_seq) {}

  std::size_t seq() const { return seq_; }
  std::size_t missingSeq() const { return missing_seq_; }

 private:
  std::size_t seq_;
  std::size_t missing_seq_;
};

class CyclicClusterDependency : public SessionError {
 public:
  CyclicClusterDependency(std::vector<std::uint32_t> clusters, std::uint32_t bead, std::uint32_t depends_on);

  const std::vector<std::uint32_t>& clusters() const { return clusters_; }
  std::uint32_t witnessBead() const { return bead_; }
  std::uint32_t witnessDependsOn() const { return depends_on_; }

 private:
  std::vector<std::uint32_t> clusters_;
  std::uint32_t bead_;
  std::uint32_t depends_on_;
};

}  // namespace cbt
