#include "mbt/dsl.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace mbt::dsl {

namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class Tok { Ident, Int, Sym, Epsilon, Eof };

struct Token {
  Tok kind = Tok::Eof;
  std::string text;
  SourceLocation loc;
};

const std::set<std::string>& keywords() {
  static const std::set<std::string> kw = {
      "model", "root",  "type",     "fun",   "component", "concrete", "ports",
      "in",    "out",   "sub",      "channels", "delayed", "efsm",    "states",
      "init",  "local", "trans",    "when",  "if",        "then",     "else",
      "set",   "case",  "of",       "true",  "false"};
  return kw;
}

class Lexer {
 public:
  Lexer(const std::string& text, std::string file) : text_(text), file_(std::move(file)) {
    tokenize();
  }

  const std::vector<Token>& tokens() const { return tokens_; }

 private:
  void tokenize() {
    size_t i = 0, line = 1, col = 1;
    auto loc = [&]() { return SourceLocation{file_, static_cast<int>(line), static_cast<int>(col)}; };
    auto advance = [&](size_t n) {
      for (size_t k = 0; k < n; ++k) {
        if (text_[i + k] == '\n') {
          ++line;
          col = 1;
        } else {
          ++col;
        }
      }
      i += n;
    };
    while (i < text_.size()) {
      char c = text_[i];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance(1);
        continue;
      }
      if (c == '-' && i + 1 < text_.size() && text_[i + 1] == '-') {
        while (i < text_.size() && text_[i] != '\n') advance(1);
        continue;
      }
      SourceLocation at = loc();
      if (std::isalpha(static_cast<unsigned char>(c))) {
        size_t j = i;
        while (j < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[j])) || text_[j] == '_'))
          ++j;
        tokens_.push_back({Tok::Ident, text_.substr(i, j - i), at});
        advance(j - i);
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        size_t j = i;
        while (j < text_.size() && std::isdigit(static_cast<unsigned char>(text_[j]))) ++j;
        tokens_.push_back({Tok::Int, text_.substr(i, j - i), at});
        advance(j - i);
        continue;
      }
      if (static_cast<unsigned char>(c) == 0xCE && i + 1 < text_.size() &&
          static_cast<unsigned char>(text_[i + 1]) == 0xB5) {
        tokens_.push_back({Tok::Epsilon, "\xce\xb5", at});
        advance(2);
        continue;
      }
      static const char* two[] = {"->", ":=", "==", "!=", "<=", ">=", "&&", "||"};
      bool matched = false;
      for (const char* t : two) {
        if (text_.compare(i, 2, t) == 0) {
          tokens_.push_back({Tok::Sym, t, at});
          advance(2);
          matched = true;
          break;
        }
      }
      if (matched) continue;
      static const std::string singles = "{}(),;:.|=<>+-*/%!_";
      if (singles.find(c) != std::string::npos) {
        tokens_.push_back({Tok::Sym, std::string(1, c), at});
        advance(1);
        continue;
      }
      throw ParseError(at, "a token", std::string(1, c));
    }
    tokens_.push_back({Tok::Eof, "<end of input>", loc()});
  }

  const std::string& text_;
  std::string file_;
  std::vector<Token> tokens_;
};

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  Parser(const std::string& text, const std::string& file) : lexer_(text, file) {}

  Model parse_model_file() {
    Model m;
    m.name = "model";
    bool root_declared = false;
    while (!at(Tok::Eof)) {
      skip_semis();
      if (at(Tok::Eof)) break;
      if (accept_kw("model")) {
        m.name = expect_ident("model name");
      } else if (accept_kw("root")) {
        m.root = expect_uident("root component name");
        root_declared = true;
      } else if (accept_kw("type")) {
        m.types.push_back(parse_typedef());
      } else if (accept_kw("fun")) {
        m.functions.push_back(parse_fundef());
      } else if (accept_kw("component")) {
        m.components.push_back(parse_component());
      } else {
        fail("'type', 'fun', 'component', 'root', or 'model'");
      }
    }
    if (!root_declared && m.components.size() == 1) m.root = m.components[0].name;
    return m;
  }

  Value parse_term_text() {
    Value v = parse_term_inner();
    if (!at(Tok::Eof)) fail("end of term");
    return v;
  }

  Pattern parse_pattern_text() {
    Pattern p = parse_pattern();
    if (!at(Tok::Eof)) fail("end of pattern");
    return p;
  }

 private:
  // -- token plumbing
  const Token& cur() const { return lexer_.tokens()[pos_]; }
  bool at(Tok k) const { return cur().kind == k; }
  bool at_sym(const std::string& s) const { return cur().kind == Tok::Sym && cur().text == s; }
  bool at_kw(const std::string& s) const { return cur().kind == Tok::Ident && cur().text == s; }
  void advance() { ++pos_; }

  [[noreturn]] void fail(const std::string& expected) const {
    throw ParseError(cur().loc, expected, cur().text);
  }

  bool accept_sym(const std::string& s) {
    if (!at_sym(s)) return false;
    advance();
    return true;
  }
  void expect_sym(const std::string& s) {
    if (!accept_sym(s)) fail("'" + s + "'");
  }
  bool accept_kw(const std::string& s) {
    if (!at_kw(s)) return false;
    advance();
    return true;
  }
  void expect_kw(const std::string& s) {
    if (!accept_kw(s)) fail("'" + s + "'");
  }

  std::string expect_ident(const std::string& what) {
    if (!at(Tok::Ident)) fail(what);
    if (keywords().count(cur().text)) fail(what + " (found reserved word)");
    std::string s = cur().text;
    advance();
    return s;
  }
  std::string expect_uident(const std::string& what) {
    if (!at(Tok::Ident) || !std::isupper(static_cast<unsigned char>(cur().text[0])))
      fail(what + " (capitalized)");
    return expect_ident(what);
  }
  std::string expect_lident(const std::string& what) {
    if (!at(Tok::Ident) || !std::islower(static_cast<unsigned char>(cur().text[0])))
      fail(what + " (lowercase)");
    return expect_ident(what);
  }

  void skip_semis() {
    while (accept_sym(";")) {
    }
  }

  // -- declarations

  TypeRef parse_typeref() {
    if (at_kw("in") || at_kw("out")) fail("a type");  // common slip in port lists
    std::string n = expect_uident("a type name");
    if (n == "Int") return TypeRef::builtin_int();
    if (n == "Bool") return TypeRef::builtin_bool();
    return TypeRef::named(n);
  }

  TypeDef parse_typedef() {
    TypeDef t;
    t.loc = cur().loc;
    t.name = expect_uident("a type name");
    expect_sym("=");
    do {
      TypeDef::Ctor c;
      c.name = expect_uident("a constructor name");
      if (accept_sym("(")) {
        do {
          c.arg_types.push_back(parse_typeref());
        } while (accept_sym(","));
        expect_sym(")");
      }
      t.ctors.push_back(std::move(c));
    } while (accept_sym("|"));
    return t;
  }

  FuncDef parse_fundef() {
    FuncDef f;
    f.loc = cur().loc;
    f.name = expect_lident("a function name");
    expect_sym("(");
    if (!at_sym(")")) {
      do {
        std::string pn = expect_lident("a parameter name");
        expect_sym(":");
        f.params.emplace_back(pn, parse_typeref());
      } while (accept_sym(","));
    }
    expect_sym(")");
    expect_sym(":");
    f.result_type = parse_typeref();
    expect_sym("=");
    f.body = parse_expr();
    return f;
  }

  Component parse_component() {
    Component c;
    c.loc = cur().loc;
    c.name = expect_uident("a component name");
    c.concrete = accept_kw("concrete");
    expect_sym("{");
    while (!accept_sym("}")) {
      skip_semis();
      if (accept_sym("}")) break;
      if (accept_kw("ports")) {
        expect_sym("{");
        while (!accept_sym("}")) {
          skip_semis();
          if (accept_sym("}")) break;
          PortDecl p;
          p.loc = cur().loc;
          if (accept_kw("in"))
            p.dir = PortDir::In;
          else if (accept_kw("out"))
            p.dir = PortDir::Out;
          else
            fail("'in' or 'out'");
          p.name = expect_lident("a port name");
          expect_sym(":");
          p.type = parse_typeref();
          c.ports.push_back(std::move(p));
        }
      } else if (accept_kw("sub")) {
        SubDecl s;
        s.loc = cur().loc;
        s.name = expect_lident("a subcomponent name");
        expect_sym(":");
        s.component = expect_uident("a component name");
        c.subs.push_back(std::move(s));
      } else if (accept_kw("channels")) {
        expect_sym("{");
        while (!accept_sym("}")) {
          skip_semis();
          if (accept_sym("}")) break;
          c.channels.push_back(parse_channel());
        }
      } else if (accept_kw("efsm")) {
        c.efsm = parse_efsm();
      } else {
        fail("'ports', 'sub', 'channels', or 'efsm'");
      }
    }
    return c;
  }

  ChannelDecl parse_channel() {
    ChannelDecl ch;
    ch.loc = cur().loc;
    ch.name = expect_lident("a channel name");
    expect_sym(":");
    ch.from = parse_endpoint();
    expect_sym("->");
    ch.to = parse_endpoint();
    ch.delayed = accept_kw("delayed");
    return ch;
  }

  Endpoint parse_endpoint() {
    Endpoint e;
    std::string first = expect_lident("a port or subcomponent name");
    if (accept_sym(".")) {
      e.sub = first;
      e.port = expect_lident("a port name");
    } else {
      e.port = first;
    }
    return e;
  }

  Efsm parse_efsm() {
    Efsm e;
    expect_sym("{");
    while (!accept_sym("}")) {
      skip_semis();
      if (accept_sym("}")) break;
      if (accept_kw("states")) {
        do {
          e.states.push_back(expect_uident("a state name"));
        } while (accept_sym(","));
      } else if (accept_kw("init")) {
        e.initial = expect_uident("a state name");
      } else if (accept_kw("local")) {
        LocalDecl l;
        l.loc = cur().loc;
        l.name = expect_lident("a local name");
        expect_sym(":");
        l.type = parse_typeref();
        expect_sym(":=");
        l.init = parse_expr();
        e.locals.push_back(std::move(l));
      } else if (accept_kw("trans")) {
        e.transitions.push_back(parse_transition());
        e.transitions.back().index = static_cast<int>(e.transitions.size()) - 1;
      } else {
        fail("'states', 'init', 'local', or 'trans'");
      }
    }
    return e;
  }

  Transition parse_transition() {
    Transition t;
    t.loc = cur().loc;
    t.source = expect_uident("a state name");
    expect_sym("->");
    t.target = expect_uident("a state name");
    if (accept_kw("when")) {
      do {
        std::string port = expect_lident("an in-port name");
        expect_sym("=");
        t.triggers.emplace_back(port, parse_pattern());
      } while (accept_sym(","));
    }
    if (accept_kw("if"))
      t.guard = parse_expr();
    else
      t.guard = expr_true();
    if (accept_kw("then")) {
      do {
        std::string port = expect_lident("an out-port name");
        expect_sym("=");
        t.outputs.emplace_back(port, parse_expr());
      } while (accept_sym(","));
    }
    if (accept_kw("set")) {
      do {
        std::string local = expect_lident("a local name");
        expect_sym(":=");
        t.assignments.emplace_back(local, parse_expr());
      } while (accept_sym(","));
    }
    return t;
  }

  // -- patterns

  Pattern parse_pattern() {
    SourceLocation here = cur().loc;
    Pattern p;
    if (accept_sym("_")) {
      p = Pattern::wildcard();
    } else if (at(Tok::Epsilon)) {
      advance();
      p = Pattern::absent();
    } else if (at(Tok::Int)) {
      p = Pattern::lit(Value::integer(BigInt(cur().text)));
      advance();
    } else if (accept_sym("-")) {
      if (!at(Tok::Int)) fail("an integer literal");
      p = Pattern::lit(Value::integer(-BigInt(cur().text)));
      advance();
    } else if (accept_kw("true")) {
      p = Pattern::lit(Value::boolean(true));
    } else if (accept_kw("false")) {
      p = Pattern::lit(Value::boolean(false));
    } else if (at(Tok::Ident)) {
      if (std::isupper(static_cast<unsigned char>(cur().text[0]))) {
        std::string name = expect_uident("a constructor");
        std::vector<Pattern> args;
        if (accept_sym("(")) {
          do {
            args.push_back(parse_pattern());
          } while (accept_sym(","));
          expect_sym(")");
        }
        p = Pattern::con(std::move(name), std::move(args));
      } else {
        p = Pattern::var(expect_lident("a binder"));
      }
    } else {
      fail("a pattern");
    }
    p.loc = here;
    return p;
  }

  // -- expressions (precedence climbing)

  ExprPtr parse_expr() { return parse_or(); }

  ExprPtr parse_or() {
    ExprPtr lhs = parse_and();
    while (at_sym("||")) {
      SourceLocation here = cur().loc;
      advance();
      lhs = make_expr(Expr::Binary{BinOp::Or, lhs, parse_and()}, here);
    }
    return lhs;
  }

  ExprPtr parse_and() {
    ExprPtr lhs = parse_cmp();
    while (at_sym("&&")) {
      SourceLocation here = cur().loc;
      advance();
      lhs = make_expr(Expr::Binary{BinOp::And, lhs, parse_cmp()}, here);
    }
    return lhs;
  }

  ExprPtr parse_cmp() {
    ExprPtr lhs = parse_add();
    static const std::pair<const char*, BinOp> ops[] = {
        {"==", BinOp::Eq}, {"!=", BinOp::Ne}, {"<=", BinOp::Le},
        {">=", BinOp::Ge}, {"<", BinOp::Lt},  {">", BinOp::Gt}};
    for (const auto& [sym, op] : ops) {
      if (at_sym(sym)) {
        SourceLocation here = cur().loc;
        advance();
        return make_expr(Expr::Binary{op, lhs, parse_add()}, here);
      }
    }
    return lhs;
  }

  ExprPtr parse_add() {
    ExprPtr lhs = parse_mul();
    while (at_sym("+") || at_sym("-")) {
      BinOp op = at_sym("+") ? BinOp::Add : BinOp::Sub;
      SourceLocation here = cur().loc;
      advance();
      lhs = make_expr(Expr::Binary{op, lhs, parse_mul()}, here);
    }
    return lhs;
  }

  ExprPtr parse_mul() {
    ExprPtr lhs = parse_unary();
    while (at_sym("*") || at_sym("/") || at_sym("%")) {
      BinOp op = at_sym("*") ? BinOp::Mul : (at_sym("/") ? BinOp::Div : BinOp::Mod);
      SourceLocation here = cur().loc;
      advance();
      lhs = make_expr(Expr::Binary{op, lhs, parse_unary()}, here);
    }
    return lhs;
  }

  ExprPtr parse_unary() {
    if (at_sym("!")) {
      SourceLocation here = cur().loc;
      advance();
      return make_expr(Expr::Not{parse_unary()}, here);
    }
    if (at_sym("-")) {
      SourceLocation here = cur().loc;
      advance();
      ExprPtr operand = parse_unary();
      // Fold negated integer literals so "-5" round-trips as one node.
      if (auto* l = operand->as<Expr::Lit>()) {
        if (l->value.kind() == Value::Kind::Int)
          return make_expr(Expr::Lit{Value::integer(-l->value.as_int())}, here);
      }
      return make_expr(Expr::Neg{operand}, here);
    }
    return parse_primary();
  }

  ExprPtr parse_primary() {
    SourceLocation here = cur().loc;
    if (accept_sym("(")) {
      ExprPtr e = parse_expr();
      expect_sym(")");
      return e;
    }
    if (at(Tok::Int)) {
      ExprPtr e = make_expr(Expr::Lit{Value::integer(BigInt(cur().text))}, here);
      advance();
      return e;
    }
    if (accept_kw("true")) return make_expr(Expr::Lit{Value::boolean(true)}, here);
    if (accept_kw("false")) return make_expr(Expr::Lit{Value::boolean(false)}, here);
    if (accept_kw("if")) {
      Expr::If node;
      node.cond = parse_expr();
      expect_kw("then");
      node.then_branch = parse_expr();
      expect_kw("else");
      node.else_branch = parse_expr();
      return make_expr(std::move(node), here);
    }
    if (accept_kw("case")) {
      Expr::Case node;
      node.scrutinee = parse_expr();
      expect_kw("of");
      expect_sym("{");
      while (!accept_sym("}")) {
        skip_semis();
        if (accept_sym("}")) break;
        CaseArm arm;
        arm.pattern = parse_pattern();
        expect_sym("->");
        arm.body = parse_expr();
        node.arms.push_back(std::move(arm));
      }
      if (node.arms.empty()) throw ParseError(here, "at least one case arm", "}");
      return make_expr(std::move(node), here);
    }
    if (at(Tok::Ident)) {
      if (std::isupper(static_cast<unsigned char>(cur().text[0]))) {
        std::string name = expect_uident("a constructor");
        std::vector<ExprPtr> args;
        if (accept_sym("(")) {
          do {
            args.push_back(parse_expr());
          } while (accept_sym(","));
          expect_sym(")");
        }
        return make_expr(Expr::Con{std::move(name), std::move(args)}, here);
      }
      std::string name = expect_lident("a name");
      if (accept_sym("(")) {
        std::vector<ExprPtr> args;
        if (!at_sym(")")) {
          do {
            args.push_back(parse_expr());
          } while (accept_sym(","));
        }
        expect_sym(")");
        return make_expr(Expr::Call{std::move(name), std::move(args)}, here);
      }
      return make_expr(Expr::Var{std::move(name)}, here);
    }
    fail("an expression");
  }

  // -- value terms

  Value parse_term_inner() {
    if (at(Tok::Epsilon)) {
      advance();
      return Value::absent();
    }
    if (at(Tok::Int)) {
      Value v = Value::integer(BigInt(cur().text));
      advance();
      return v;
    }
    if (accept_sym("-")) {
      if (!at(Tok::Int)) fail("an integer");
      Value v = Value::integer(-BigInt(cur().text));
      advance();
      return v;
    }
    if (accept_kw("true")) return Value::boolean(true);
    if (accept_kw("false")) return Value::boolean(false);
    if (at(Tok::Ident) && std::isupper(static_cast<unsigned char>(cur().text[0]))) {
      std::string name = expect_uident("a constructor");
      std::vector<Value> args;
      if (accept_sym("(")) {
        do {
          args.push_back(parse_term_inner());
        } while (accept_sym(","));
        expect_sym(")");
      }
      return Value::con(std::move(name), std::move(args));
    }
    fail("a value term");
  }

  Lexer lexer_;
  size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Printer

int expr_prec(const ExprPtr& e) {
  if (e->is<Expr::If>() || e->is<Expr::Case>()) return 0;
  if (auto* b = e->as<Expr::Binary>()) {
    switch (b->op) {
      case BinOp::Or: return 1;
      case BinOp::And: return 2;
      case BinOp::Eq:
      case BinOp::Ne:
      case BinOp::Lt:
      case BinOp::Le:
      case BinOp::Gt:
      case BinOp::Ge: return 3;
      case BinOp::Add:
      case BinOp::Sub: return 4;
      default: return 5;
    }
  }
  if (e->is<Expr::Not>() || e->is<Expr::Neg>()) return 6;
  return 7;
}

void print_pattern(std::ostream& os, const Pattern& p) {
  switch (p.kind) {
    case Pattern::Kind::Wildcard:
      os << "_";
      return;
    case Pattern::Kind::AbsentPat:
      os << "\xce\xb5";
      return;
    case Pattern::Kind::Var:
      os << p.name;
      return;
    case Pattern::Kind::Lit:
      os << p.literal.term();
      return;
    case Pattern::Kind::Con:
      os << p.name;
      if (!p.args.empty()) {
        os << "(";
        for (size_t i = 0; i < p.args.size(); ++i) {
          if (i) os << ", ";
          print_pattern(os, p.args[i]);
        }
        os << ")";
      }
      return;
  }
}

void print_expr(std::ostream& os, const ExprPtr& e, int min_prec) {
  int prec = expr_prec(e);
  bool wrap = prec < min_prec;
  if (wrap) os << "(";
  if (auto* v = e->as<Expr::Var>()) {
    os << v->name;
  } else if (auto* l = e->as<Expr::Lit>()) {
    os << l->value.term();
  } else if (auto* c = e->as<Expr::Con>()) {
    os << c->name;
    if (!c->args.empty()) {
      os << "(";
      for (size_t i = 0; i < c->args.size(); ++i) {
        if (i) os << ", ";
        print_expr(os, c->args[i], 0);
      }
      os << ")";
    }
  } else if (auto* c = e->as<Expr::Call>()) {
    os << c->name << "(";
    for (size_t i = 0; i < c->args.size(); ++i) {
      if (i) os << ", ";
      print_expr(os, c->args[i], 0);
    }
    os << ")";
  } else if (auto* i = e->as<Expr::If>()) {
    os << "if ";
    print_expr(os, i->cond, 0);
    os << " then ";
    print_expr(os, i->then_branch, 0);
    os << " else ";
    print_expr(os, i->else_branch, 0);
  } else if (auto* c = e->as<Expr::Case>()) {
    os << "case ";
    print_expr(os, c->scrutinee, 0);
    os << " of { ";
    for (size_t i = 0; i < c->arms.size(); ++i) {
      if (i) os << "; ";
      print_pattern(os, c->arms[i].pattern);
      os << " -> ";
      print_expr(os, c->arms[i].body, 0);
    }
    os << " }";
  } else if (auto* n = e->as<Expr::Not>()) {
    os << "!";
    print_expr(os, n->operand, 6);
  } else if (auto* n = e->as<Expr::Neg>()) {
    // A negated literal is semantically the folded literal; print it that way
    // so the output stays canonical.
    if (auto* l = n->operand->as<Expr::Lit>()) {
      os << Value::integer(-l->value.as_int()).term();
    } else {
      os << "-";
      print_expr(os, n->operand, 7);
    }
  } else if (auto* b = e->as<Expr::Binary>()) {
    bool nonassoc = binop_is_comparison(b->op);
    print_expr(os, b->lhs, nonassoc ? prec + 1 : prec);
    os << " " << binop_token(b->op) << " ";
    print_expr(os, b->rhs, prec + 1);
  }
  if (wrap) os << ")";
}

std::string expr_str(const ExprPtr& e) {
  std::ostringstream os;
  print_expr(os, e, 0);
  return os.str();
}

void print_transition(std::ostream& os, const Transition& t) {
  os << "    trans " << t.source << " -> " << t.target;
  if (!t.triggers.empty()) {
    os << " when ";
    for (size_t i = 0; i < t.triggers.size(); ++i) {
      if (i) os << ", ";
      os << t.triggers[i].first << " = ";
      print_pattern(os, t.triggers[i].second);
    }
  }
  bool trivial_guard = false;
  if (auto* l = t.guard->as<Expr::Lit>())
    trivial_guard = l->value.kind() == Value::Kind::Bool && l->value.as_bool();
  if (!trivial_guard) os << " if " << expr_str(t.guard);
  if (!t.outputs.empty()) {
    os << " then ";
    for (size_t i = 0; i < t.outputs.size(); ++i) {
      if (i) os << ", ";
      os << t.outputs[i].first << " = " << expr_str(t.outputs[i].second);
    }
  }
  if (!t.assignments.empty()) {
    os << " set ";
    for (size_t i = 0; i < t.assignments.size(); ++i) {
      if (i) os << ", ";
      os << t.assignments[i].first << " := " << expr_str(t.assignments[i].second);
    }
  }
  os << "\n";
}

}  // namespace

Model parse_model(const std::string& text, const std::string& filename) {
  Parser p(text, filename);
  return p.parse_model_file();
}

std::string print_model(const Model& m) {
  std::ostringstream os;
  if (m.name != "model") os << "model " << m.name << "\n\n";
  for (const auto& t : m.types) {
    os << "type " << t.name << " = ";
    for (size_t i = 0; i < t.ctors.size(); ++i) {
      if (i) os << " | ";
      os << t.ctors[i].name;
      if (!t.ctors[i].arg_types.empty()) {
        os << "(";
        for (size_t j = 0; j < t.ctors[i].arg_types.size(); ++j) {
          if (j) os << ", ";
          os << t.ctors[i].arg_types[j].str();
        }
        os << ")";
      }
    }
    os << "\n";
  }
  if (!m.types.empty() && !m.functions.empty()) os << "\n";
  for (const auto& f : m.functions) {
    os << "fun " << f.name << "(";
    for (size_t i = 0; i < f.params.size(); ++i) {
      if (i) os << ", ";
      os << f.params[i].first << " : " << f.params[i].second.str();
    }
    os << ") : " << f.result_type.str() << " = " << expr_str(f.body) << "\n";
  }
  for (const auto& c : m.components) {
    os << "\ncomponent " << c.name << (c.concrete ? " concrete" : "") << " {\n";
    if (!c.ports.empty()) {
      os << "  ports {\n";
      for (const auto& p : c.ports)
        os << "    " << (p.dir == PortDir::In ? "in " : "out ") << p.name << " : "
           << p.type.str() << "\n";
      os << "  }\n";
    }
    for (const auto& s : c.subs) os << "  sub " << s.name << " : " << s.component << "\n";
    if (!c.channels.empty()) {
      os << "  channels {\n";
      for (const auto& ch : c.channels) {
        os << "    " << ch.name << " : " << ch.from.str() << " -> " << ch.to.str();
        if (ch.delayed) os << " delayed";
        os << "\n";
      }
      os << "  }\n";
    }
    if (c.efsm) {
      const Efsm& e = *c.efsm;
      os << "  efsm {\n";
      os << "    states ";
      for (size_t i = 0; i < e.states.size(); ++i) {
        if (i) os << ", ";
        os << e.states[i];
      }
      os << "\n    init " << e.initial << "\n";
      for (const auto& l : e.locals)
        os << "    local " << l.name << " : " << l.type.str() << " := " << expr_str(l.init)
           << "\n";
      for (const auto& t : e.transitions) print_transition(os, t);
      os << "  }\n";
    }
    os << "}\n";
  }
  if (m.components.size() != 1 && !m.root.empty()) os << "\nroot " << m.root << "\n";
  return os.str();
}

Value parse_term(const std::string& text) {
  Parser p(text, "<term>");
  return p.parse_term_text();
}

std::string print_term(const Value& v) { return v.term(); }

Pattern parse_pattern(const std::string& text) {
  Parser p(text, "<pattern>");
  return p.parse_pattern_text();
}

std::string print_pattern(const Pattern& p) {
  std::ostringstream os;
  print_pattern(os, p);
  return os.str();
}

}  // namespace mbt::dsl

namespace mbt {

namespace {

bool expr_eq(const ExprPtr& a, const ExprPtr& b);

bool pattern_eq(const Pattern& a, const Pattern& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Pattern::Kind::Wildcard:
    case Pattern::Kind::AbsentPat:
      return true;
    case Pattern::Kind::Var:
      return a.name == b.name;
    case Pattern::Kind::Lit:
      return a.literal == b.literal;
    case Pattern::Kind::Con: {
      if (a.name != b.name || a.args.size() != b.args.size()) return false;
      for (size_t i = 0; i < a.args.size(); ++i)
        if (!pattern_eq(a.args[i], b.args[i])) return false;
      return true;
    }
  }
  return false;
}

bool expr_eq(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return a == b;
  if (a->node.index() != b->node.index()) return false;
  if (auto* x = a->as<Expr::Var>()) return x->name == b->as<Expr::Var>()->name;
  if (auto* x = a->as<Expr::Lit>()) return x->value == b->as<Expr::Lit>()->value;
  if (auto* x = a->as<Expr::Con>()) {
    auto* y = b->as<Expr::Con>();
    if (x->name != y->name || x->args.size() != y->args.size()) return false;
    for (size_t i = 0; i < x->args.size(); ++i)
      if (!expr_eq(x->args[i], y->args[i])) return false;
    return true;
  }
  if (auto* x = a->as<Expr::Call>()) {
    auto* y = b->as<Expr::Call>();
    if (x->name != y->name || x->args.size() != y->args.size()) return false;
    for (size_t i = 0; i < x->args.size(); ++i)
      if (!expr_eq(x->args[i], y->args[i])) return false;
    return true;
  }
  if (auto* x = a->as<Expr::If>()) {
    auto* y = b->as<Expr::If>();
    return expr_eq(x->cond, y->cond) && expr_eq(x->then_branch, y->then_branch) &&
           expr_eq(x->else_branch, y->else_branch);
  }
  if (auto* x = a->as<Expr::Case>()) {
    auto* y = b->as<Expr::Case>();
    if (!expr_eq(x->scrutinee, y->scrutinee) || x->arms.size() != y->arms.size()) return false;
    for (size_t i = 0; i < x->arms.size(); ++i) {
      if (!pattern_eq(x->arms[i].pattern, y->arms[i].pattern)) return false;
      if (!expr_eq(x->arms[i].body, y->arms[i].body)) return false;
    }
    return true;
  }
  if (auto* x = a->as<Expr::Not>()) return expr_eq(x->operand, b->as<Expr::Not>()->operand);
  if (auto* x = a->as<Expr::Neg>()) return expr_eq(x->operand, b->as<Expr::Neg>()->operand);
  auto* x = a->as<Expr::Binary>();
  auto* y = b->as<Expr::Binary>();
  return x->op == y->op && expr_eq(x->lhs, y->lhs) && expr_eq(x->rhs, y->rhs);
}

template <typename T, typename Eq>
bool vec_eq(const std::vector<T>& a, const std::vector<T>& b, Eq eq) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!eq(a[i], b[i])) return false;
  return true;
}

}  // namespace

bool model_equal(const Model& a, const Model& b) {
  if (a.name != b.name || a.root != b.root) return false;
  if (!vec_eq(a.types, b.types, [](const TypeDef& x, const TypeDef& y) {
        return x.name == y.name &&
               vec_eq(x.ctors, y.ctors, [](const TypeDef::Ctor& c, const TypeDef::Ctor& d) {
                 return c.name == d.name && vec_eq(c.arg_types, d.arg_types,
                                                   [](const TypeRef& s, const TypeRef& t) {
                                                     return s == t;
                                                   });
               });
      }))
    return false;
  if (!vec_eq(a.functions, b.functions, [](const FuncDef& x, const FuncDef& y) {
        return x.name == y.name && x.result_type == y.result_type &&
               vec_eq(x.params, y.params,
                      [](const auto& p, const auto& q) {
                        return p.first == q.first && p.second == q.second;
                      }) &&
               expr_eq(x.body, y.body);
      }))
    return false;
  auto trans_eq = [](const Transition& x, const Transition& y) {
    return x.source == y.source && x.target == y.target &&
           vec_eq(x.triggers, y.triggers,
                  [](const auto& p, const auto& q) {
                    return p.first == q.first && pattern_eq(p.second, q.second);
                  }) &&
           expr_eq(x.guard, y.guard) &&
           vec_eq(x.outputs, y.outputs,
                  [](const auto& p, const auto& q) {
                    return p.first == q.first && expr_eq(p.second, q.second);
                  }) &&
           vec_eq(x.assignments, y.assignments, [](const auto& p, const auto& q) {
             return p.first == q.first && expr_eq(p.second, q.second);
           });
  };
  return vec_eq(a.components, b.components, [&](const Component& x, const Component& y) {
    if (x.name != y.name || x.concrete != y.concrete) return false;
    if (!vec_eq(x.ports, y.ports, [](const PortDecl& p, const PortDecl& q) {
          return p.name == q.name && p.dir == q.dir && p.type == q.type;
        }))
      return false;
    if (!vec_eq(x.subs, y.subs, [](const SubDecl& s, const SubDecl& t) {
          return s.name == t.name && s.component == t.component;
        }))
      return false;
    if (!vec_eq(x.channels, y.channels, [](const ChannelDecl& c, const ChannelDecl& d) {
          return c.name == d.name && c.from == d.from && c.to == d.to && c.delayed == d.delayed;
        }))
      return false;
    if (x.efsm.has_value() != y.efsm.has_value()) return false;
    if (!x.efsm) return true;
    const Efsm& e = *x.efsm;
    const Efsm& f = *y.efsm;
    return e.states == f.states && e.initial == f.initial &&
           vec_eq(e.locals, f.locals,
                  [](const LocalDecl& l, const LocalDecl& m2) {
                    return l.name == m2.name && l.type == m2.type && expr_eq(l.init, m2.init);
                  }) &&
           vec_eq(e.transitions, f.transitions, trans_eq);
  });
}

uint64_t model_hash(const Model& m) { return fnv1a(dsl::print_model(m)); }

}  // namespace mbt
