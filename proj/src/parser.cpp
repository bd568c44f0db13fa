#include "gradl/parser.hpp"

#include <cctype>
#include <cstdlib>
#include <stdexcept>

namespace gradl {

namespace {

struct Reader {
  const std::string& text;
  size_t pos = 0;
  uint32_t line = 1;
  uint32_t col = 1;

  explicit Reader(const std::string& t) : text(t) {}

  bool eof() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }

  char advance() {
    char c = text[pos++];
    if (c == '\n') {
      line++;
      col = 1;
    } else {
      col++;
    }
    return c;
  }

  void skip_space() {
    while (!eof()) {
      char c = peek();
      if (c == ';') {
        while (!eof() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        return;
      }
    }
  }

  Span here() const { return Span{line, col}; }

  SExpr read() {
    skip_space();
    if (eof()) throw CompileError{here(), "unexpected end of input"};
    Span start = here();
    char c = peek();
    if (c == '(' || c == '[') {
      char close = c == '(' ? ')' : ']';
      advance();
      SExpr s;
      s.span = start;
      while (true) {
        skip_space();
        if (eof())
          throw CompileError{start, "unbalanced parenthesis"};
        if (peek() == ')' || peek() == ']') {
          if (peek() != close)
            throw CompileError{here(), "mismatched bracket kind"};
          advance();
          return s;
        }
        s.list.push_back(read());
      }
    }
    if (c == ')' || c == ']')
      throw CompileError{start, "unexpected closing bracket"};
    SExpr s;
    s.is_atom = true;
    s.span = start;
    while (!eof()) {
      char d = peek();
      if (std::isspace(static_cast<unsigned char>(d)) || d == '(' ||
          d == ')' || d == '[' || d == ']' || d == ';')
        break;
      s.atom.push_back(advance());
    }
    return s;
  }
};

bool looks_numeric(const std::string& a) {
  size_t i = (a[0] == '-' || a[0] == '+') ? 1 : 0;
  return i < a.size() && std::isdigit(static_cast<unsigned char>(a[i]));
}

bool parse_number(const std::string& a, bool& is_float, int64_t& iv, double& fv) {
  if (!looks_numeric(a)) return false;
  if (a.find('.') != std::string::npos || a.find('e') != std::string::npos ||
      a.find('E') != std::string::npos) {
    char* end = nullptr;
    fv = std::strtod(a.c_str(), &end);
    if (end != a.c_str() + a.size()) return false;
    is_float = true;
    return true;
  }
  char* end = nullptr;
  iv = std::strtoll(a.c_str(), &end, 10);
  if (end != a.c_str() + a.size()) return false;
  is_float = false;
  return true;
}

struct Parser {
  TypeTable& types;
  RefRep ref_rep;
  std::string file;

  AstPtr node(AstKind k, Span sp) {
    auto n = std::make_shared<AstNode>();
    n->kind = k;
    n->span = sp;
    return n;
  }

  TypeId type_of(const SExpr& s) { return parse_type(types, s, ref_rep); }

  Param parse_param(const SExpr& s) {
    if (s.is_atom) return Param{s.atom, std::nullopt, s.span};
    if (s.list.size() == 3 && s.list[0].is_atom && s.list[1].is_atom &&
        s.list[1].atom == ":")
      return Param{s.list[0].atom, type_of(s.list[2]), s.span};
    throw CompileError{s.span, "malformed parameter, expected x or [x : T]"};
  }

  // Body sequences: a single expression, or several wrapped in a begin.
  AstPtr parse_body(const std::vector<SExpr>& list, size_t from, Span sp) {
    if (from >= list.size())
      throw CompileError{sp, "missing body"};
    if (from + 1 == list.size()) return parse_expr(list[from]);
    auto b = node(AstKind::Begin, list[from].span);
    for (size_t i = from; i < list.size(); ++i)
      b->kids.push_back(parse_expr(list[i]));
    return b;
  }

  AstPtr parse_expr(const SExpr& s) {
    if (s.is_atom) return parse_atom(s);
    if (s.list.empty()) return node(AstKind::UnitLit, s.span);
    const SExpr& head = s.list[0];
    if (head.is_atom) {
      const std::string& h = head.atom;
      if (h == "lambda") return parse_lambda(s);
      if (h == "let") return parse_let(s);
      if (h == "if") return parse_if(s);
      if (h == "begin") {
        if (s.list.size() < 2)
          throw CompileError{s.span, "begin needs at least one expression"};
        auto n = node(AstKind::Begin, s.span);
        for (size_t i = 1; i < s.list.size(); ++i)
          n->kids.push_back(parse_expr(s.list[i]));
        return n;
      }
      if (h == "while") {
        if (s.list.size() < 3)
          throw CompileError{s.span, "while needs a condition and a body"};
        auto n = node(AstKind::While, s.span);
        n->kids.push_back(parse_expr(s.list[1]));
        n->kids.push_back(parse_body(s.list, 2, s.span));
        return n;
      }
      if (h == "tuple" || h == "list") {
        if (s.list.size() < 3)
          throw CompileError{s.span, "tuple needs at least two elements"};
        auto n = node(AstKind::TupleMake, s.span);
        for (size_t i = 1; i < s.list.size(); ++i)
          n->kids.push_back(parse_expr(s.list[i]));
        return n;
      }
      if (h == "tuple-proj") {
        if (s.list.size() != 3 || !s.list[2].is_atom)
          throw CompileError{s.span, "expected (tuple-proj e k)"};
        bool isf;
        int64_t iv;
        double fv;
        if (!parse_number(s.list[2].atom, isf, iv, fv) || isf || iv < 0)
          throw CompileError{s.list[2].span, "projection index must be a literal natural"};
        auto n = node(AstKind::TupleProj, s.span);
        n->kids.push_back(parse_expr(s.list[1]));
        n->proj_index = static_cast<int>(iv);
        return n;
      }
      if (h == "car" || h == "cadr" || h == "caddr") {
        if (s.list.size() != 2)
          throw CompileError{s.span, h + " takes one argument"};
        auto n = node(AstKind::TupleProj, s.span);
        n->kids.push_back(parse_expr(s.list[1]));
        n->proj_index = h == "car" ? 0 : h == "cadr" ? 1 : 2;
        return n;
      }
      if (h == ":") {
        if (s.list.size() != 3)
          throw CompileError{s.span, "expected (: e T)"};
        auto n = node(AstKind::Ascribe, s.span);
        n->kids.push_back(parse_expr(s.list[1]));
        n->anno = type_of(s.list[2]);
        return n;
      }
      if (h == "ref") return unary(AstKind::RefMake, s);
      if (h == "deref") return unary(AstKind::RefRead, s);
      if (h == "set-ref!") return nary(AstKind::RefWrite, s, 2);
      if (h == "vect") return nary(AstKind::VectMake, s, 2);
      if (h == "vect-ref") return nary(AstKind::VectRead, s, 2);
      if (h == "vect-set!") return nary(AstKind::VectWrite, s, 3);
      if (h == "vect-len") return unary(AstKind::VectLen, s);
      if (auto p = prim_of(h)) {
        size_t want = *p == PrimOp::Not ? 1 : 2;
        if (s.list.size() != want + 1)
          throw CompileError{s.span, "operator " + h + " takes " +
                                         std::to_string(want) + " operands"};
        auto n = node(AstKind::Prim, s.span);
        n->prim = *p;
        for (size_t i = 1; i < s.list.size(); ++i)
          n->kids.push_back(parse_expr(s.list[i]));
        return n;
      }
      if (h == "define")
        throw CompileError{s.span, "define is only allowed at top level"};
    }
    // Application.
    auto n = node(AstKind::App, s.span);
    for (const SExpr& e : s.list) n->kids.push_back(parse_expr(e));
    return n;
  }

  std::optional<PrimOp> prim_of(const std::string& h) {
    if (h == "+") return PrimOp::AddI;
    if (h == "-") return PrimOp::SubI;
    if (h == "*") return PrimOp::MulI;
    if (h == "/") return PrimOp::DivI;
    if (h == "%" || h == "modulo") return PrimOp::ModI;
    if (h == "+.") return PrimOp::AddF;
    if (h == "-.") return PrimOp::SubF;
    if (h == "*.") return PrimOp::MulF;
    if (h == "/.") return PrimOp::DivF;
    if (h == "=") return PrimOp::Eq;
    if (h == "<") return PrimOp::Lt;
    if (h == ">") return PrimOp::Gt;
    if (h == "<=") return PrimOp::Le;
    if (h == ">=") return PrimOp::Ge;
    if (h == "not") return PrimOp::Not;
    return std::nullopt;
  }

  AstPtr unary(AstKind k, const SExpr& s) { return nary(k, s, 1); }

  AstPtr nary(AstKind k, const SExpr& s, size_t n_args) {
    if (s.list.size() != n_args + 1)
      throw CompileError{s.span, s.list[0].atom + " takes " +
                                     std::to_string(n_args) + " arguments"};
    auto n = node(k, s.span);
    for (size_t i = 1; i < s.list.size(); ++i)
      n->kids.push_back(parse_expr(s.list[i]));
    return n;
  }

  AstPtr parse_atom(const SExpr& s) {
    const std::string& a = s.atom;
    if (a == "#t" || a == "#f") {
      auto n = node(AstKind::BoolLit, s.span);
      n->bval = a == "#t";
      return n;
    }
    bool isf;
    int64_t iv;
    double fv;
    if (parse_number(a, isf, iv, fv)) {
      auto n = node(isf ? AstKind::FloatLit : AstKind::IntLit, s.span);
      n->ival = iv;
      n->fval = fv;
      return n;
    }
    if (looks_numeric(a))
      throw CompileError{s.span, "malformed number: " + a};
    auto n = node(AstKind::Var, s.span);
    n->name = a;
    return n;
  }

  AstPtr parse_lambda(const SExpr& s) {
    if (s.list.size() < 3 || s.list[1].is_atom)
      throw CompileError{s.span, "expected (lambda (params...) body...)"};
    auto n = node(AstKind::Lambda, s.span);
    for (const SExpr& p : s.list[1].list) n->params.push_back(parse_param(p));
    size_t body_from = 2;
    if (s.list.size() >= 4 && s.list[2].is_atom && s.list[2].atom == ":") {
      n->ret_anno = type_of(s.list[3]);
      body_from = 4;
    }
    n->kids.push_back(parse_body(s.list, body_from, s.span));
    return n;
  }

  AstPtr parse_let(const SExpr& s) {
    if (s.list.size() < 3 || s.list[1].is_atom)
      throw CompileError{s.span, "expected (let (bindings...) body...)"};
    auto n = node(AstKind::Let, s.span);
    for (const SExpr& b : s.list[1].list) {
      if (b.is_atom || b.list.size() < 2 || !b.list[0].is_atom)
        throw CompileError{b.span, "malformed let binding"};
      Binding bind;
      bind.name = b.list[0].atom;
      bind.span = b.span;
      if (b.list.size() == 2) {
        bind.init = parse_expr(b.list[1]);
      } else if (b.list.size() == 4 && b.list[1].is_atom &&
                 b.list[1].atom == ":") {
        bind.anno = type_of(b.list[2]);
        bind.init = parse_expr(b.list[3]);
      } else {
        throw CompileError{b.span, "malformed let binding, expected [x e] or [x : T e]"};
      }
      n->binds.push_back(std::move(bind));
    }
    n->kids.push_back(parse_body(s.list, 2, s.span));
    return n;
  }

  AstPtr parse_if(const SExpr& s) {
    if (s.list.size() != 4)
      throw CompileError{s.span, "expected (if c t e)"};
    auto n = node(AstKind::If, s.span);
    for (size_t i = 1; i < 4; ++i) n->kids.push_back(parse_expr(s.list[i]));
    return n;
  }

  Define parse_define(const SExpr& s) {
    Define d;
    d.span = s.span;
    if (s.list.size() < 3)
      throw CompileError{s.span, "malformed define"};
    const SExpr& target = s.list[1];
    if (target.is_atom) {
      d.name = target.atom;
      if (s.list.size() != 3)
        throw CompileError{s.span, "expected (define x e)"};
      d.body = parse_expr(s.list[2]);
      return d;
    }
    if (!target.list.empty() && target.list[0].is_atom &&
        target.list.size() == 3 && target.list[1].is_atom &&
        target.list[1].atom == ":" && s.list.size() == 3) {
      // (define [x : T] e)
      d.name = target.list[0].atom;
      d.ret_anno = type_of(target.list[2]);
      d.body = parse_expr(s.list[2]);
      return d;
    }
    if (target.list.empty() || !target.list[0].is_atom)
      throw CompileError{target.span, "malformed define target"};
    d.is_fun = true;
    d.name = target.list[0].atom;
    for (size_t i = 1; i < target.list.size(); ++i)
      d.params.push_back(parse_param(target.list[i]));
    size_t body_from = 2;
    if (s.list.size() >= 4 && s.list[2].is_atom && s.list[2].atom == ":") {
      d.ret_anno = type_of(s.list[3]);
      body_from = 4;
    }
    d.body = parse_body(s.list, body_from, s.span);
    return d;
  }
};

}  // namespace

std::vector<SExpr> read_sexprs(const std::string& text) {
  Reader r(text);
  std::vector<SExpr> out;
  while (true) {
    r.skip_space();
    if (r.eof()) return out;
    out.push_back(r.read());
  }
}

TypeId parse_type(TypeTable& types, const SExpr& s, RefRep ref_rep) {
  if (s.is_atom) {
    if (s.atom == "Int") return kInt;
    if (s.atom == "Bool") return kBool;
    if (s.atom == "Float") return kFloat;
    if (s.atom == "Unit") return kUnit;
    if (s.atom == "Dyn") return kDyn;
    throw CompileError{s.span, "unknown type: " + s.atom};
  }
  if (s.list.empty() || !s.list[0].is_atom)
    throw CompileError{s.span, "malformed type"};
  const std::string& h = s.list[0].atom;
  if (h == "->") {
    if (s.list.size() < 2)
      throw CompileError{s.span, "function type needs a return type"};
    std::vector<TypeId> params;
    for (size_t i = 1; i + 1 < s.list.size(); ++i)
      params.push_back(parse_type(types, s.list[i], ref_rep));
    TypeId ret = parse_type(types, s.list.back(), ref_rep);
    return types.fun(std::move(params), ret);
  }
  if (h == "Tuple") {
    if (s.list.size() < 3)
      throw CompileError{s.span, "tuple type needs at least two elements"};
    std::vector<TypeId> elems;
    for (size_t i = 1; i < s.list.size(); ++i)
      elems.push_back(parse_type(types, s.list[i], ref_rep));
    return types.tuple(std::move(elems));
  }
  if (h == "Ref") {
    if (s.list.size() != 2) throw CompileError{s.span, "expected (Ref T)"};
    TypeId e = parse_type(types, s.list[1], ref_rep);
    return ref_rep == RefRep::Proxied ? types.ref_p(e) : types.ref_m(e);
  }
  if (h == "Vect") {
    if (s.list.size() != 2) throw CompileError{s.span, "expected (Vect T)"};
    return types.vect(parse_type(types, s.list[1], ref_rep));
  }
  throw CompileError{s.span, "unknown type constructor: " + h};
}

Program parse_program(TypeTable& types, const std::string& text,
                      const std::string& file, RefRep ref_rep) {
  Parser p{types, ref_rep, file};
  Program prog;
  prog.file = file;
  for (const SExpr& s : read_sexprs(text)) {
    if (!s.is_atom && !s.list.empty() && s.list[0].is_atom &&
        s.list[0].atom == "define") {
      if (!prog.exprs.empty())
        throw CompileError{s.span, "define must precede the program expressions"};
      prog.defines.push_back(p.parse_define(s));
    } else {
      prog.exprs.push_back(p.parse_expr(s));
    }
  }
  if (prog.exprs.empty())
    throw CompileError{Span{1, 1}, "program has no result expression"};
  return prog;
}

AstPtr clone_ast(const AstPtr& n) {
  if (!n) return nullptr;
  auto c = std::make_shared<AstNode>(*n);
  for (AstPtr& k : c->kids) k = clone_ast(k);
  for (Binding& b : c->binds) b.init = clone_ast(b.init);
  return c;
}

Program clone_program(const Program& p) {
  Program c = p;
  for (Define& d : c.defines) d.body = clone_ast(d.body);
  for (AstPtr& e : c.exprs) e = clone_ast(e);
  return c;
}

}  // namespace gradl
