#include "gradl/typecheck.hpp"

#include <unordered_map>

namespace gradl {

namespace {

struct Scope {
  Scope* parent = nullptr;
  std::unordered_map<std::string, TypeId> vars;

  const TypeId* lookup(const std::string& name) const {
    for (const Scope* s = this; s; s = s->parent) {
      auto it = s->vars.find(name);
      if (it != s->vars.end()) return &it->second;
    }
    return nullptr;
  }
};

struct Checker {
  TypeTable& tt;
  RefRep ref_rep;

  [[noreturn]] void inconsistent(Span sp, TypeId a, TypeId b, const char* what) {
    throw CompileError{sp, std::string(what) + ": " + tt.show(a) +
                               " is inconsistent with " + tt.show(b)};
  }

  void require_consistent(Span sp, TypeId have, TypeId want, const char* what) {
    if (!tt.consistent(have, want)) inconsistent(sp, have, want, what);
  }

  TypeId ref_type(TypeId elem) {
    return ref_rep == RefRep::Proxied ? tt.ref_p(elem) : tt.ref_m(elem);
  }

  bool is_ref_head(TypeId t) {
    TypeHead h = tt.head(t);
    return h == TypeHead::RefP || h == TypeHead::RefM;
  }

  TypeId check(AstNode& n, Scope& sc) {
    TypeId t = check_impl(n, sc);
    n.type = t;
    return t;
  }

  TypeId check_impl(AstNode& n, Scope& sc) {
    switch (n.kind) {
      case AstKind::IntLit: return kInt;
      case AstKind::FloatLit: return kFloat;
      case AstKind::BoolLit: return kBool;
      case AstKind::UnitLit: return kUnit;
      case AstKind::Var: {
        const TypeId* t = sc.lookup(n.name);
        if (!t) throw CompileError{n.span, "unbound variable: " + n.name};
        return *t;
      }
      case AstKind::Lambda: {
        Scope inner{&sc, {}};
        std::vector<TypeId> params;
        for (const Param& p : n.params) {
          TypeId pt = p.anno.value_or(kDyn);
          params.push_back(pt);
          inner.vars[p.name] = pt;
        }
        TypeId body = check(*n.kids[0], inner);
        TypeId ret = body;
        if (n.ret_anno) {
          require_consistent(n.span, body, *n.ret_anno, "return type");
          ret = *n.ret_anno;
        }
        return tt.fun(std::move(params), ret);
      }
      case AstKind::App: {
        TypeId ft = check(*n.kids[0], sc);
        size_t n_args = n.kids.size() - 1;
        std::vector<TypeId> args;
        for (size_t i = 1; i < n.kids.size(); ++i)
          args.push_back(check(*n.kids[i], sc));
        if (ft == kDyn) return kDyn;
        if (tt.head(ft) != TypeHead::Fun)
          throw CompileError{n.span, "operator is not a function: " + tt.show(ft)};
        if (tt.fun_arity(ft) != n_args)
          throw CompileError{n.span,
                             "arity mismatch: operator expects " +
                                 std::to_string(tt.fun_arity(ft)) +
                                 " arguments, got " + std::to_string(n_args)};
        for (size_t i = 0; i < n_args; ++i)
          require_consistent(n.kids[i + 1]->span, args[i], tt.fun_param(ft, i),
                             "argument");
        return tt.fun_ret(ft);
      }
      case AstKind::Let: {
        Scope inner{&sc, {}};
        for (Binding& b : n.binds) {
          TypeId it = check(*b.init, sc);
          TypeId vt = it;
          if (b.anno) {
            require_consistent(b.span, it, *b.anno, "let binding");
            vt = *b.anno;
          }
          inner.vars[b.name] = vt;
        }
        return check(*n.kids[0], inner);
      }
      case AstKind::If: {
        TypeId c = check(*n.kids[0], sc);
        require_consistent(n.kids[0]->span, c, kBool, "if condition");
        TypeId t1 = check(*n.kids[1], sc);
        TypeId t2 = check(*n.kids[2], sc);
        auto m = tt.meet(t1, t2);
        if (!m) inconsistent(n.span, t1, t2, "if branches");
        return *m;
      }
      case AstKind::Prim: {
        std::vector<TypeId> args;
        for (AstPtr& k : n.kids) args.push_back(check(*k, sc));
        switch (n.prim) {
          case PrimOp::AddI: case PrimOp::SubI: case PrimOp::MulI:
          case PrimOp::DivI: case PrimOp::ModI:
            require_consistent(n.kids[0]->span, args[0], kInt, "operand");
            require_consistent(n.kids[1]->span, args[1], kInt, "operand");
            return kInt;
          case PrimOp::AddF: case PrimOp::SubF: case PrimOp::MulF:
          case PrimOp::DivF:
            require_consistent(n.kids[0]->span, args[0], kFloat, "operand");
            require_consistent(n.kids[1]->span, args[1], kFloat, "operand");
            return kFloat;
          case PrimOp::Not:
            require_consistent(n.kids[0]->span, args[0], kBool, "operand");
            return kBool;
          default: {
            // Comparisons pick the numeric flavor from any non-Dyn operand;
            // with both operands at Dyn the dispatch happens at runtime.
            TypeId want{};
            if (args[0] == kFloat || args[1] == kFloat) want = kFloat;
            else if (args[0] == kInt || args[1] == kInt) want = kInt;
            else if (args[0] == kDyn && args[1] == kDyn) return kBool;
            else
              throw CompileError{n.span, "comparison needs numeric operands, got " +
                                             tt.show(args[0]) + " and " +
                                             tt.show(args[1])};
            require_consistent(n.kids[0]->span, args[0], want, "operand");
            require_consistent(n.kids[1]->span, args[1], want, "operand");
            return kBool;
          }
        }
      }
      case AstKind::TupleMake: {
        std::vector<TypeId> elems;
        for (AstPtr& k : n.kids) elems.push_back(check(*k, sc));
        return tt.tuple(std::move(elems));
      }
      case AstKind::TupleProj: {
        TypeId t = check(*n.kids[0], sc);
        if (t == kDyn) return kDyn;
        if (tt.head(t) != TypeHead::Tuple)
          throw CompileError{n.span, "projection from a non-tuple: " + tt.show(t)};
        if (static_cast<size_t>(n.proj_index) >= tt.node(t).kids.size())
          throw CompileError{n.span, "projection index out of range for " + tt.show(t)};
        return tt.node(t).kids[n.proj_index];
      }
      case AstKind::Ascribe: {
        TypeId t = check(*n.kids[0], sc);
        require_consistent(n.span, t, *n.anno, "ascription");
        return *n.anno;
      }
      case AstKind::RefMake:
        return ref_type(check(*n.kids[0], sc));
      case AstKind::RefRead: {
        TypeId t = check(*n.kids[0], sc);
        if (t == kDyn) return kDyn;
        if (!is_ref_head(t))
          throw CompileError{n.span, "deref of a non-reference: " + tt.show(t)};
        return tt.elem(t);
      }
      case AstKind::RefWrite: {
        TypeId t = check(*n.kids[0], sc);
        TypeId v = check(*n.kids[1], sc);
        if (t == kDyn) return kUnit;
        if (!is_ref_head(t))
          throw CompileError{n.span, "set-ref! of a non-reference: " + tt.show(t)};
        require_consistent(n.kids[1]->span, v, tt.elem(t), "stored value");
        return kUnit;
      }
      case AstKind::VectMake: {
        TypeId c = check(*n.kids[0], sc);
        require_consistent(n.kids[0]->span, c, kInt, "vector size");
        return tt.vect(check(*n.kids[1], sc));
      }
      case AstKind::VectRead: {
        TypeId t = check(*n.kids[0], sc);
        TypeId i = check(*n.kids[1], sc);
        require_consistent(n.kids[1]->span, i, kInt, "vector index");
        if (t == kDyn) return kDyn;
        if (tt.head(t) != TypeHead::Vect)
          throw CompileError{n.span, "vect-ref of a non-vector: " + tt.show(t)};
        return tt.elem(t);
      }
      case AstKind::VectWrite: {
        TypeId t = check(*n.kids[0], sc);
        TypeId i = check(*n.kids[1], sc);
        TypeId v = check(*n.kids[2], sc);
        require_consistent(n.kids[1]->span, i, kInt, "vector index");
        if (t == kDyn) return kUnit;
        if (tt.head(t) != TypeHead::Vect)
          throw CompileError{n.span, "vect-set! of a non-vector: " + tt.show(t)};
        require_consistent(n.kids[2]->span, v, tt.elem(t), "stored value");
        return kUnit;
      }
      case AstKind::VectLen: {
        TypeId t = check(*n.kids[0], sc);
        if (t != kDyn && tt.head(t) != TypeHead::Vect)
          throw CompileError{n.span, "vect-len of a non-vector: " + tt.show(t)};
        return kInt;
      }
      case AstKind::Begin: {
        TypeId t = kUnit;
        for (AstPtr& k : n.kids) t = check(*k, sc);
        return t;
      }
      case AstKind::While: {
        TypeId c = check(*n.kids[0], sc);
        require_consistent(n.kids[0]->span, c, kBool, "while condition");
        check(*n.kids[1], sc);
        return kUnit;
      }
    }
    throw CompileError{n.span, "unhandled expression form"};
  }
};

}  // namespace

void typecheck(TypeTable& types, Program& program, RefRep ref_rep) {
  Checker ck{types, ref_rep};
  Scope globals;

  // Function signatures first: defines are mutually recursive, and a missing
  // return annotation means the recursion is dynamically typed.
  for (Define& d : program.defines) {
    if (!d.is_fun) continue;
    std::vector<TypeId> params;
    for (const Param& p : d.params) params.push_back(p.anno.value_or(kDyn));
    d.type = types.fun(std::move(params), d.ret_anno.value_or(kDyn));
    if (globals.vars.count(d.name))
      throw CompileError{d.span, "duplicate define: " + d.name};
    globals.vars[d.name] = d.type;
  }
  // Value defines see functions and earlier values.
  for (Define& d : program.defines) {
    if (d.is_fun) continue;
    TypeId it = ck.check(*d.body, globals);
    if (d.ret_anno) {
      ck.require_consistent(d.span, it, *d.ret_anno, "define");
      d.type = *d.ret_anno;
    } else {
      d.type = it;
    }
    if (globals.vars.count(d.name))
      throw CompileError{d.span, "duplicate define: " + d.name};
    globals.vars[d.name] = d.type;
  }
  // Function bodies last, with every global in scope.
  for (Define& d : program.defines) {
    if (!d.is_fun) continue;
    Scope inner{&globals, {}};
    for (const Param& p : d.params) inner.vars[p.name] = p.anno.value_or(kDyn);
    TypeId body = ck.check(*d.body, inner);
    ck.require_consistent(d.span, body, types.fun_ret(d.type), "return type");
  }
  for (AstPtr& e : program.exprs) ck.check(*e, globals);
}

}  // namespace gradl
