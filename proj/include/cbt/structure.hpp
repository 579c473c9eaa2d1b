#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cbt/errors.hpp"
#include "cbt/history.hpp"

namespace cbt {

enum class DeclKind { ClassLike, Method };

struct Declaration {
  DeclKind kind = DeclKind::ClassLike;
  std::string qualified_name;
  std::size_t start_line = 0;  // first line of the declaration header
  std::size_t end_line = 0;    // line of the closing brace
  std::optional<std::size_t> parent;  // index into FileStructure::declarations
};

/// Declarations of one file, ordered by start line.
struct FileStructure {
  std::vector<Declaration> declarations;
};

using StructuralMap = std::map<std::string, FileStructure>;

enum class ParseFailureReason { UnbalancedBraces, UnterminatedLiteral, UnterminatedComment };

std::string_view toString(ParseFailureReason reason);

class ParseFailure : public ProcessingError {
 public:
  ParseFailure(ParseFailureReason reason, std::size_t line, const std::string& context = {})
      : ProcessingError((context.empty() ? std::string{} : context + ": ") + "parse failure (" +
                        std::string(toString(reason)) + ") at line " + std::to_string(line)),
        reason_(reason),
        line_(line) {}

  ParseFailureReason reason() const { return reason_; }
  std::size_t line() const { return line_; }

 private:
  ParseFailureReason reason_;
  std::size_t line_;
};

class UnknownFile : public ProcessingError {
 public:
  explicit UnknownFile(const std::string& file) : ProcessingError("file not in structural map: " + file) {}
};

/// Recognizes class-like and method declarations of Java-like source.
FileStructure parseStructure(std::string_view text);

bool parses(std::string_view text);

/// Brace nesting depth after each line, as seen by the tokenizer (comments and
/// literals excluded). Throws ParseFailure on unterminated literals or comments.
std::vector<int> braceDepthByLine(std::string_view text);

struct Location {
  std::optional<std::string> class_name;
  std::optional<std::string> method;

  bool operator==(const Location&) const = default;
};

Location locate(const FileStructure& structure, std::size_t line);
Location locate(const StructuralMap& map, const std::string& file, std::size_t line);

/// Sets enclosing class/method on every bead by locating its first hunk in the
/// bead's pre-change snapshot.
FineHistory annotateBeads(FineHistory history);

}  // namespace cbt
