#pragma once
// Textual knowledge-base format. Grammar:
//
//   kb := "kb" STRING "{" preds ops roles node+ edge+ "}"
//   preds := "predicates" "{" (IDENT "/" INT ";")+ "}"
//   ops   := "operators"  "{" (IDENT "/" INT ";")+ "}"
//   roles := "objects"    "{" (IDENT ":" IDENT ";")+ "}"
//   node  := "node" IDENT "{" atomlist? "}"
//   edge  := "edge" IDENT "->" IDENT ":" atom "add" "{" atomlist? "}"
//                                              "del" "{" atomlist? "}"
//   atom  := IDENT "(" IDENT ("," IDENT)* ")"
//   atomlist := atom ("," atom)*
//
// "#" starts a comment running to end of line. Idents may contain "-" as an
// interior character ("is-open"); "->" is its own token. Exactly one node is
// named "goal" and exactly one node has no incoming edges (the initial).

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "abil/symbolic.hpp"

namespace abil {

struct KbSource {
  std::string text;
  std::string origin;  // file path or inline tag, for error messages
};

struct ParseError : std::runtime_error {
  int line;
  int col;
  ParseError(const std::string& origin, int line_, int col_, const std::string& msg)
      : std::runtime_error(origin + ":" + std::to_string(line_) + ":" +
                           std::to_string(col_) + ": " + msg),
        line(line_),
        col(col_) {}
};

namespace kbdetail {

struct Token {
  enum Kind { Ident, Int, Str, Punct, End } kind = End;
  std::string text;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  Lexer(const std::string& text, const std::string& origin)
      : text_(text), origin_(origin) {}

  Token next() {
    skip_ws();
    Token t;
    t.line = line_;
    t.col = col_;
    if (pos_ >= text_.size()) return t;  // End
    char c = text_[pos_];
    if (c == '"') {
      advance();
      std::string s;
      while (pos_ < text_.size() && text_[pos_] != '"') {
        if (text_[pos_] == '\n') fail(t, "unterminated string");
        s += text_[pos_];
        advance();
      }
      if (pos_ >= text_.size()) fail(t, "unterminated string");
      advance();
      t.kind = Token::Str;
      t.text = s;
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string s;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        s += text_[pos_];
        advance();
      }
      t.kind = Token::Int;
      t.text = s;
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string s;
      while (pos_ < text_.size()) {
        char d = text_[pos_];
        bool ident_char = std::isalnum(static_cast<unsigned char>(d)) || d == '_';
        // interior '-' stays in the ident unless it opens an "->" arrow
        bool hyphen = d == '-' && pos_ + 1 < text_.size() && text_[pos_ + 1] != '>' &&
                      (std::isalnum(static_cast<unsigned char>(text_[pos_ + 1])) ||
                       text_[pos_ + 1] == '_');
        if (!ident_char && !hyphen) break;
        s += d;
        advance();
      }
      t.kind = Token::Ident;
      t.text = s;
      return t;
    }
    if (c == '-' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
      advance();
      advance();
      t.kind = Token::Punct;
      t.text = "->";
      return t;
    }
    if (std::string("{}();:,/").find(c) != std::string::npos) {
      advance();
      t.kind = Token::Punct;
      t.text = std::string(1, c);
      return t;
    }
    fail(t, std::string("unexpected character '") + c + "'");
    return t;  // unreachable
  }

  [[noreturn]] void fail(const Token& at, const std::string& msg) const {
    throw ParseError(origin_, at.line, at.col, msg);
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else {
        break;
      }
    }
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& text_;
  std::string origin_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  Parser(const std::string& text, const std::string& origin)
      : lex_(text, origin), origin_(origin) {
    cur_ = lex_.next();
  }

  StateMachine parse() {
    expect_ident("kb");
    machine_.name = expect(Token::Str, "machine name string").text;
    expect_punct("{");

    expect_ident("predicates");
    parse_symbol_block(machine_.predicates);
    expect_ident("operators");
    parse_symbol_block(machine_.operators);
    expect_ident("objects");
    parse_role_block();

    while (at_ident("node")) parse_node();
    if (machine_.nodes.empty()) lex_.fail(cur_, "expected at least one node");
    while (at_ident("edge")) parse_edge();
    if (machine_.edges.empty()) lex_.fail(cur_, "expected at least one edge");
    expect_punct("}");
    if (cur_.kind != Token::End) lex_.fail(cur_, "trailing input after machine");

    finish();
    return machine_;
  }

 private:
  void parse_symbol_block(std::vector<PredicateSymbol>& out) {
    expect_punct("{");
    do {
      Token name = expect(Token::Ident, "symbol name");
      expect_punct("/");
      Token arity = expect(Token::Int, "arity");
      expect_punct(";");
      if (arity.text.size() > 2) lex_.fail(arity, "arity out of range");
      out.push_back({name.text, std::stoi(arity.text)});
    } while (cur_.kind == Token::Ident);
    expect_punct("}");
  }

  void parse_role_block() {
    expect_punct("{");
    do {
      Token role = expect(Token::Ident, "role name");
      expect_punct(":");
      Token kind = expect(Token::Ident, "role kind");
      expect_punct(";");
      machine_.roles.emplace_back(role.text, kind.text);
    } while (cur_.kind == Token::Ident);
    expect_punct("}");
  }

  void parse_node() {
    expect_ident("node");
    Token id = expect(Token::Ident, "node id");
    if (machine_.nodes.count(id.text)) lex_.fail(id, "duplicate node " + id.text);
    expect_punct("{");
    machine_.nodes[id.text] = parse_atomlist();
    expect_punct("}");
    node_order_.push_back(id.text);
  }

  void parse_edge() {
    expect_ident("edge");
    Token src = expect(Token::Ident, "source node");
    expect_punct("->");
    Token dst = expect(Token::Ident, "destination node");
    if (!machine_.nodes.count(src.text)) lex_.fail(src, "unknown node " + src.text);
    if (!machine_.nodes.count(dst.text)) lex_.fail(dst, "unknown node " + dst.text);
    expect_punct(":");
    Edge e;
    e.src = src.text;
    e.dst = dst.text;
    e.op = parse_atom();
    expect_ident("add");
    expect_punct("{");
    e.add = parse_atomlist();
    expect_punct("}");
    expect_ident("del");
    expect_punct("{");
    e.del = parse_atomlist();
    expect_punct("}");
    machine_.edges.push_back(std::move(e));
  }

  SymbolicState parse_atomlist() {
    std::vector<GroundAtom> atoms;
    if (cur_.kind == Token::Ident) {
      atoms.push_back(parse_atom());
      while (at_punct(",")) {
        consume();
        atoms.push_back(parse_atom());
      }
    }
    return SymbolicState{std::move(atoms)};
  }

  GroundAtom parse_atom() {
    GroundAtom a;
    a.pred = expect(Token::Ident, "predicate name").text;
    expect_punct("(");
    a.args.push_back(role_ref(expect(Token::Ident, "argument").text));
    while (at_punct(",")) {
      consume();
      a.args.push_back(role_ref(expect(Token::Ident, "argument").text));
    }
    expect_punct(")");
    return a;
  }

  // Initial/goal resolution plus a structural-validity pass; a parse succeeds
  // only for machines that validate cleanly.
  void finish() {
    auto goal_it = machine_.nodes.find("goal");
    if (goal_it == machine_.nodes.end())
      throw ParseError(origin_, 1, 1, "machine has no node named goal");
    machine_.goal = "goal";

    std::set<std::string> has_incoming;
    for (const Edge& e : machine_.edges) has_incoming.insert(e.dst);
    std::vector<std::string> entries;
    for (const std::string& id : node_order_)
      if (!has_incoming.count(id)) entries.push_back(id);
    if (entries.size() != 1)
      throw ParseError(origin_, 1, 1,
                       "expected exactly one node with no incoming edges, found " +
                           std::to_string(entries.size()));
    machine_.initial = entries[0];

    auto violations = validate_machine(machine_);
    if (!violations.empty()) {
      const Violation& v = violations[0];
      throw ParseError(origin_, 1, 1, v.code + " at " + v.where + ": " + v.detail);
    }
  }

  Token expect(Token::Kind kind, const std::string& what) {
    if (cur_.kind != kind) lex_.fail(cur_, "expected " + what);
    return consume();
  }
  void expect_punct(const std::string& p) {
    if (!at_punct(p)) lex_.fail(cur_, "expected '" + p + "'");
    consume();
  }
  void expect_ident(const std::string& word) {
    if (!at_ident(word)) lex_.fail(cur_, "expected '" + word + "'");
    consume();
  }
  bool at_punct(const std::string& p) const {
    return cur_.kind == Token::Punct && cur_.text == p;
  }
  bool at_ident(const std::string& word) const {
    return cur_.kind == Token::Ident && cur_.text == word;
  }
  Token consume() {
    Token t = cur_;
    cur_ = lex_.next();
    return t;
  }

  Lexer lex_;
  std::string origin_;
  Token cur_;
  StateMachine machine_;
  std::vector<std::string> node_order_;
};

}  // namespace kbdetail

inline StateMachine parse_kb(const KbSource& src) {
  std::string text = src.text;
  // newline-normalize so column counts are stable across CRLF sources
  std::string normalized;
  normalized.reserve(text.size());
  for (char c : text)
    if (c != '\r') normalized += c;
  kbdetail::Parser parser(normalized, src.origin.empty() ? "<inline>" : src.origin);
  return parser.parse();
}

inline StateMachine parse_kb_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open kb file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_kb(KbSource{buf.str(), path});
}

namespace kbdetail {

inline std::string render_atom(const GroundAtom& a) { return to_string(a); }

inline std::string render_atomlist(const SymbolicState& s) {
  std::string out;
  for (std::size_t i = 0; i < s.atoms.size(); ++i) {
    if (i) out += ", ";
    out += render_atom(s.atoms[i]);
  }
  return out;
}

}  // namespace kbdetail

// Canonical text: declarations in stored order, nodes sorted by id, edges in
// stored order, atom lists sorted (SymbolicState keeps them sorted). Comments
// from any original source are not part of the machine and are dropped.
inline KbSource render_kb(const StateMachine& m) {
  std::ostringstream out;
  out << "kb \"" << m.name << "\" {\n";
  out << "  predicates {";
  for (const auto& p : m.predicates) out << " " << p.name << "/" << p.arity << ";";
  out << " }\n";
  out << "  operators {";
  for (const auto& o : m.operators) out << " " << o.name << "/" << o.arity << ";";
  out << " }\n";
  out << "  objects {";
  for (const auto& [role, kind] : m.roles) out << " " << role << ": " << kind << ";";
  out << " }\n\n";
  for (const auto& [id, cond] : m.nodes) {
    out << "  node " << id << " { " << kbdetail::render_atomlist(cond) << " }\n";
  }
  out << "\n";
  for (const Edge& e : m.edges) {
    out << "  edge " << e.src << " -> " << e.dst << " : " << kbdetail::render_atom(e.op)
        << " add { " << kbdetail::render_atomlist(e.add) << " } del { "
        << kbdetail::render_atomlist(e.del) << " }\n";
  }
  out << "}\n";
  return KbSource{out.str(), "<render:" + m.name + ">"};
}

// Concrete object standing in for a role; carries its kind for type checks.
struct BoundObject {
  int id = -1;
  std::string kind;
  auto operator<=>(const BoundObject&) const = default;
};

using RoleBinding = std::map<std::string, BoundObject>;

struct BindError : std::runtime_error {
  std::string code;  // "unbound-role" or "type-mismatch"
  std::string role;
  BindError(std::string code_, std::string role_, const std::string& msg)
      : std::runtime_error(msg), code(std::move(code_)), role(std::move(role_)) {}
};

// Substitutes concrete object ids for every role placeholder. The binding
// must cover each declared role with an object of the declared kind.
inline StateMachine bind_roles(const StateMachine& m, const RoleBinding& binding) {
  for (const auto& [role, kind] : m.roles) {
    auto it = binding.find(role);
    if (it == binding.end())
      throw BindError("unbound-role", role, "no binding for role " + role);
    if (it->second.kind != kind)
      throw BindError("type-mismatch", role,
                      "role " + role + " wants kind " + kind + ", got " +
                          it->second.kind);
  }
  auto bind_atom = [&](const GroundAtom& a) {
    GroundAtom out = a;
    for (ObjectRef& r : out.args) {
      if (r.bound()) continue;
      auto it = binding.find(r.role);
      if (it == binding.end())
        throw BindError("unbound-role", r.role, "no binding for role " + r.role);
      r = obj(it->second.id);
    }
    return out;
  };
  auto bind_set = [&](const SymbolicState& s) {
    std::vector<GroundAtom> atoms;
    atoms.reserve(s.atoms.size());
    for (const GroundAtom& a : s.atoms) atoms.push_back(bind_atom(a));
    return SymbolicState{std::move(atoms)};
  };

  StateMachine out = m;
  for (auto& [id, cond] : out.nodes) cond = bind_set(cond);
  for (Edge& e : out.edges) {
    e.op = bind_atom(e.op);
    e.add = bind_set(e.add);
    e.del = bind_set(e.del);
  }
  return out;
}

}  // namespace abil
