#include "cbt/structure.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace cbt {

std::string_view toString(ParseFailureReason reason) {
  switch (reason) {
    case ParseFailureReason::UnbalancedBraces:
      return "unbalanced-braces";
    case ParseFailureReason::UnterminatedLiteral:
      return "unterminated-literal";
    case ParseFailureReason::UnterminatedComment:
      return "unterminated-comment";
  }
  return "unknown";
}

namespace {

enum class TokenKind { Identifier, Number, Literal, Punct };

struct Token {
  TokenKind kind;
  std::string text;
  std::size_t line;

  bool is(std::string_view s) const { return kind != TokenKind::Literal && text == s; }
};

bool identStart(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalpha(u) || c == '_' || c == '$' || u >= 0x80;
}

bool identPart(char c) { return identStart(c) || std::isdigit(static_cast<unsigned char>(c)); }

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> tokens;
  std::size_t line = 1;
  std::size_t i = 0;
  const std::size_t n = src.size();

  // Quoted literal ending at `quote`; a raw newline or EOF before it is an error.
  auto skipQuoted = [&](char quote) {
    const std::size_t start_line = line;
    ++i;
    while (true) {
      if (i >= n || src[i] == '\n') throw ParseFailure(ParseFailureReason::UnterminatedLiteral, start_line);
      if (src[i] == '\\') {
        i += 2;
        continue;
      }
      if (src[i] == quote) {
        ++i;
        return;
      }
      ++i;
    }
  };

  while (i < n) {
    const char c = src[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
      ++i;
    } else if (c == '/' && i + 1 < n && src[i + 1] == '/') {
      while (i < n && src[i] != '\n') ++i;
    } else if (c == '/' && i + 1 < n && src[i + 1] == '*') {
      const std::size_t start_line = line;
      i += 2;
      while (true) {
        if (i + 1 >= n) throw ParseFailure(ParseFailureReason::UnterminatedComment, start_line);
        if (src[i] == '*' && src[i + 1] == '/') {
          i += 2;
          break;
        }
        if (src[i] == '\n') ++line;
        ++i;
      }
    } else if (c == '"' && src.substr(i, 3) == "\"\"\"") {
      const std::size_t start_line = line;
      i += 3;
      while (true) {
        if (i >= n) throw ParseFailure(ParseFailureReason::UnterminatedLiteral, start_line);
        if (src[i] == '\\') {
          if (i + 1 < n && src[i + 1] == '\n') ++line;
          i += 2;
          continue;
        }
        if (src.substr(i, 3) == "\"\"\"") {
          i += 3;
          break;
        }
        if (src[i] == '\n') ++line;
        ++i;
      }
      tokens.push_back({TokenKind::Literal, "\"\"\"", start_line});
    } else if (c == '"' || c == '\'') {
      const std::size_t start = i;
      skipQuoted(c);
      tokens.push_back({TokenKind::Literal, std::string(src.substr(start, i - start)), line});
    } else if (identStart(c)) {
      const std::size_t start = i;
      while (i < n && identPart(src[i])) ++i;
      tokens.push_back({TokenKind::Identifier, std::string(src.substr(start, i - start)), line});
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      const std::size_t start = i;
      while (i < n && (identPart(src[i]) || src[i] == '.')) ++i;
      tokens.push_back({TokenKind::Number, std::string(src.substr(start, i - start)), line});
    } else if (c == '-' && i + 1 < n && src[i + 1] == '>') {
      tokens.push_back({TokenKind::Punct, "->", line});
      i += 2;
    } else {
      tokens.push_back({TokenKind::Punct, std::string(1, c), line});
      ++i;
    }
  }
  return tokens;
}

constexpr std::array<std::string_view, 10> kNonMethodKeywords = {
    "if", "while", "for", "switch", "catch", "synchronized", "do", "try", "new", "return"};

bool isNonMethodKeyword(const Token& t) {
  return t.kind == TokenKind::Identifier &&
         std::find(kNonMethodKeywords.begin(), kNonMethodKeywords.end(), t.text) != kNonMethodKeywords.end();
}

using TokenSpan = std::vector<const Token*>;

/// Index just past the group opened at `open` (matching close char), or size() if unclosed.
std::size_t skipGroup(const TokenSpan& toks, std::size_t open, std::string_view open_ch, std::string_view close_ch) {
  int depth = 0;
  for (std::size_t i = open; i < toks.size(); ++i) {
    if (toks[i]->is(open_ch)) ++depth;
    if (toks[i]->is(close_ch) && --depth == 0) return i + 1;
  }
  return toks.size();
}

/// Drops annotations (`@Name`, `@a.b.Name(...)`) and `final` modifiers.
TokenSpan stripAnnotations(const TokenSpan& toks) {
  TokenSpan out;
  for (std::size_t i = 0; i < toks.size();) {
    if (toks[i]->is("@") && i + 1 < toks.size() && toks[i + 1]->kind == TokenKind::Identifier &&
        toks[i + 1]->text != "interface") {
      i += 2;
      while (i + 1 < toks.size() && toks[i]->is(".") && toks[i + 1]->kind == TokenKind::Identifier) i += 2;
      if (i < toks.size() && toks[i]->is("(")) i = skipGroup(toks, i, "(", ")");
      continue;
    }
    if (toks[i]->is("final")) {
      ++i;
      continue;
    }
    out.push_back(toks[i++]);
  }
  return out;
}

std::string joinTokens(const TokenSpan& toks) {
  std::string out;
  const Token* prev = nullptr;
  for (const Token* t : toks) {
    const bool word = t->kind == TokenKind::Identifier || t->kind == TokenKind::Number;
    const bool prev_word = prev && (prev->kind == TokenKind::Identifier || prev->kind == TokenKind::Number);
    if (prev && ((word && prev_word) || t->is("extends") || t->is("super") || prev->is("extends") || prev->is("super")))
      out.push_back(' ');
    out += t->text;
    prev = t;
  }
  return out;
}

/// Parameter types of a parameter list (tokens between the parentheses).
std::string parameterTypes(const TokenSpan& params) {
  std::vector<TokenSpan> split(1);
  int depth = 0;
  for (const Token* t : params) {
    if (t->is("(") || t->is("<") || t->is("[")) ++depth;
    if (t->is(")") || t->is(">") || t->is("]")) --depth;
    if (depth == 0 && t->is(",")) {
      split.emplace_back();
      continue;
    }
    split.back().push_back(t);
  }
  std::string out;
  for (std::size_t i = 0; i < split.size(); ++i) {
    auto p = stripAnnotations(split[i]);
    if (p.empty()) continue;
    if (p.size() > 1 && p.back()->kind == TokenKind::Identifier) p.pop_back();
    if (!out.empty()) out.push_back(',');
    out += joinTokens(p);
  }
  return out;
}

struct ClassHeader {
  std::string name;
};

std::optional<ClassHeader> classHeader(const TokenSpan& stmt) {
  for (std::size_t i = 0; i + 1 < stmt.size(); ++i) {
    const Token& t = *stmt[i];
    if (t.kind != TokenKind::Identifier) continue;
    const bool keyword = t.text == "class" || t.text == "interface" || t.text == "enum" || t.text == "record";
    if (!keyword) continue;
    if (i > 0 && stmt[i - 1]->is(".")) continue;
    if (stmt[i + 1]->kind != TokenKind::Identifier) continue;
    return ClassHeader{stmt[i + 1]->text};
  }
  return std::nullopt;
}

std::optional<std::string> methodSignature(const TokenSpan& raw_stmt) {
  const auto stmt = stripAnnotations(raw_stmt);
  for (const Token* t : stmt) {
    if (t->is("=") || t->is("->") || isNonMethodKeyword(*t)) return std::nullopt;
  }
  int angle = 0;
  for (std::size_t i = 0; i < stmt.size(); ++i) {
    if (stmt[i]->is("<")) ++angle;
    if (stmt[i]->is(">")) --angle;
    if (angle != 0 || !stmt[i]->is("(")) continue;
    if (i == 0 || stmt[i - 1]->kind != TokenKind::Identifier) return std::nullopt;
    const std::size_t close = skipGroup(stmt, i, "(", ")");
    if (close > stmt.size() || !stmt[close - 1]->is(")")) return std::nullopt;
    const TokenSpan params(stmt.begin() + static_cast<std::ptrdiff_t>(i + 1),
                           stmt.begin() + static_cast<std::ptrdiff_t>(close - 1));
    return stmt[i - 1]->text + "(" + parameterTypes(params) + ")";
  }
  return std::nullopt;
}

enum class FrameKind { File, Class, Method, Opaque };

struct Frame {
  FrameKind kind;
  std::optional<std::size_t> decl;  // index into declarations
};

}  // namespace

FileStructure parseStructure(std::string_view text) {
  const auto tokens = tokenize(text);
  FileStructure result;
  auto& decls = result.declarations;
  std::vector<Frame> stack = {{FrameKind::File, std::nullopt}};
  TokenSpan stmt;
  std::string package_prefix;

  auto enclosingDecl = [&]() -> std::optional<std::size_t> {
    for (auto it = stack.rbegin(); it != stack.rend(); ++it)
      if (it->decl) return it->decl;
    return std::nullopt;
  };

  for (const Token& tok : tokens) {
    const FrameKind top = stack.back().kind;
    const bool in_body = top == FrameKind::Method || top == FrameKind::Opaque;

    if (tok.is("{")) {
      if (in_body) {
        stack.push_back({FrameKind::Opaque, std::nullopt});
        continue;
      }
      const std::size_t start_line = stmt.empty() ? tok.line : stmt.front()->line;
      const auto parent = enclosingDecl();
      const std::string prefix = parent ? decls[*parent].qualified_name + "." : package_prefix;
      if (auto header = classHeader(stmt)) {
        decls.push_back({DeclKind::ClassLike, prefix + header->name, start_line, 0, parent});
        stack.push_back({FrameKind::Class, decls.size() - 1});
      } else if (top == FrameKind::Class) {
        if (auto sig = methodSignature(stmt)) {
          decls.push_back({DeclKind::Method, prefix + *sig, start_line, 0, parent});
          stack.push_back({FrameKind::Method, decls.size() - 1});
        } else {
          stack.push_back({FrameKind::Opaque, std::nullopt});
        }
      } else {
        stack.push_back({FrameKind::Opaque, std::nullopt});
      }
      stmt.clear();
      continue;
    }

    if (tok.is("}")) {
      if (stack.size() == 1) throw ParseFailure(ParseFailureReason::UnbalancedBraces, tok.line);
      if (stack.back().decl) decls[*stack.back().decl].end_line = tok.line;
      stack.pop_back();
      stmt.clear();
      continue;
    }

    if (in_body) continue;

    if (tok.is(";")) {
      if (top == FrameKind::File && !stmt.empty() && stmt.front()->is("package")) {
        std::string name;
        for (std::size_t i = 1; i < stmt.size(); ++i) name += stmt[i]->text;
        package_prefix = name.empty() ? std::string{} : name + ".";
      }
      stmt.clear();
      continue;
    }
    stmt.push_back(&tok);
  }

  if (stack.size() != 1) {
    const std::size_t last_line = tokens.empty() ? 1 : tokens.back().line;
    throw ParseFailure(ParseFailureReason::UnbalancedBraces, last_line);
  }
  return result;
}

bool parses(std::string_view text) {
  try {
    parseStructure(text);
    return true;
  } catch (const ParseFailure&) {
    return false;
  }
}

std::vector<int> braceDepthByLine(std::string_view text) {
  const auto tokens = tokenize(text);
  const std::size_t line_count = splitLines(text).size();
  std::vector<int> depth(line_count, 0);
  int d = 0;
  std::size_t t = 0;
  for (std::size_t line = 1; line <= line_count; ++line) {
    while (t < tokens.size() && tokens[t].line <= line) {
      if (tokens[t].is("{")) ++d;
      if (tokens[t].is("}")) --d;
      ++t;
    }
    depth[line - 1] = d;
  }
  return depth;
}

Location locate(const FileStructure& structure, std::size_t line) {
  Location loc;
  std::size_t class_start = 0;
  std::size_t method_start = 0;
  for (const auto& d : structure.declarations) {
    if (line < d.start_line || line > d.end_line) continue;
    if (d.kind == DeclKind::ClassLike && (!loc.class_name || d.start_line >= class_start)) {
      loc.class_name = d.qualified_name;
      class_start = d.start_line;
    }
    if (d.kind == DeclKind::Method && (!loc.method || d.start_line >= method_start)) {
      loc.method = d.qualified_name;
      method_start = d.start_line;
    }
  }
  return loc;
}

Location locate(const StructuralMap& map, const std::string& file, std::size_t line) {
  const auto it = map.find(file);
  if (it == map.end()) throw UnknownFile(file);
  return locate(it->second, line);
}

FineHistory annotateBeads(FineHistory history) {
  Snapshot current = history.base;
  for (auto& bead : history.beads) {
    const auto& hunk = bead.hunks.front();
    const auto it = current.files.find(hunk.file);
    const std::string_view text = it == current.files.end() ? std::string_view{} : std::string_view{it->second};
    FileStructure structure;
    try {
      structure = parseStructure(text);
    } catch (const ParseFailure& e) {
      throw ParseFailure(e.reason(), e.line(), "bead seq " + std::to_string(bead.seq) + " (" + hunk.file + ")");
    }
    const auto loc = locate(structure, hunk.start_line_before);
    bead.enclosing_class = loc.class_name;
    bead.enclosing_method = loc.class_name ? loc.method : std::nullopt;
    current = applyHunks(current, bead);
  }
  return history;
}

}  // namespace cbt
