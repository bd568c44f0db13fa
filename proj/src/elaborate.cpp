#include "gradl/elaborate.hpp"

#include <cassert>
#include <unordered_map>

namespace gradl {

namespace {

IrPtr mk(IrNode n) { return std::make_shared<const IrNode>(std::move(n)); }

struct Lowerer {
  TypeTable& tt;
  RefRep rr;
  const std::string& file;
  std::vector<std::vector<std::string>> frames;
  std::unordered_map<std::string, uint32_t> globals;

  std::string blame(Span sp, const char* tag) const {
    return blame_label(file, sp, tag);
  }

  TypeId ref_dyn() { return rr == RefRep::Proxied ? tt.ref_p(kDyn) : tt.ref_m(kDyn); }

  IrPtr coerce_to(IrPtr e, TypeId want, Span sp, const char* tag) {
    if (e->type == want) return e;
    IrNode c;
    c.kind = IrKind::Cast;
    c.type = want;
    c.span = sp;
    c.src = e->type;
    c.tgt = want;
    c.label = blame(sp, tag);
    c.kids.push_back(std::move(e));
    return mk(std::move(c));
  }

  IrPtr lower(const AstNode& n) {
    IrNode out;
    out.span = n.span;
    out.type = n.type;
    switch (n.kind) {
      case AstKind::IntLit:
        out.kind = IrKind::IntLit;
        out.ival = n.ival;
        return mk(std::move(out));
      case AstKind::FloatLit:
        out.kind = IrKind::FloatLit;
        out.fval = n.fval;
        return mk(std::move(out));
      case AstKind::BoolLit:
        out.kind = IrKind::BoolLit;
        out.bval = n.bval;
        return mk(std::move(out));
      case AstKind::UnitLit:
        out.kind = IrKind::UnitLit;
        return mk(std::move(out));
      case AstKind::Var: {
        for (size_t i = frames.size(); i-- > 0;) {
          const auto& fr = frames[i];
          for (size_t j = fr.size(); j-- > 0;) {
            if (fr[j] == n.name) {
              out.kind = IrKind::LocalRef;
              out.hops = static_cast<uint32_t>(frames.size() - 1 - i);
              out.index = static_cast<uint32_t>(j);
              return mk(std::move(out));
            }
          }
        }
        auto it = globals.find(n.name);
        assert(it != globals.end());
        out.kind = IrKind::GlobalRef;
        out.index = it->second;
        out.name = n.name;
        return mk(std::move(out));
      }
      case AstKind::Lambda:
        return lower_lambda(n, "");
      case AstKind::App: {
        TypeId ft = n.kids[0]->type;
        size_t n_args = n.kids.size() - 1;
        if (ft == kDyn) {
          std::vector<TypeId> params(n_args, kDyn);
          TypeId want = tt.fun(std::move(params), kDyn);
          out.kind = IrKind::App;
          out.kids.push_back(
              coerce_to(lower(*n.kids[0]), want, n.kids[0]->span, "app-fn"));
          for (size_t i = 1; i < n.kids.size(); ++i)
            out.kids.push_back(coerce_to(lower(*n.kids[i]), kDyn,
                                         n.kids[i]->span, "app-arg"));
          return mk(std::move(out));
        }
        out.kind = IrKind::App;
        out.kids.push_back(lower(*n.kids[0]));
        for (size_t i = 1; i < n.kids.size(); ++i)
          out.kids.push_back(coerce_to(lower(*n.kids[i]),
                                       tt.fun_param(ft, i - 1),
                                       n.kids[i]->span, "app-arg"));
        return mk(std::move(out));
      }
      case AstKind::Let: {
        out.kind = IrKind::Let;
        out.arity = static_cast<uint32_t>(n.binds.size());
        std::vector<std::string> names;
        for (const Binding& b : n.binds) {
          TypeId want = b.anno ? *b.anno : b.init->type;
          out.kids.push_back(
              coerce_to(lower(*b.init), want, b.init->span, "let-init"));
          names.push_back(b.name);
        }
        frames.push_back(std::move(names));
        out.kids.push_back(lower(*n.kids[0]));
        frames.pop_back();
        return mk(std::move(out));
      }
      case AstKind::If: {
        out.kind = IrKind::If;
        out.kids.push_back(coerce_to(lower(*n.kids[0]), kBool,
                                     n.kids[0]->span, "if-cond"));
        out.kids.push_back(
            coerce_to(lower(*n.kids[1]), n.type, n.kids[1]->span, "if-branch"));
        out.kids.push_back(
            coerce_to(lower(*n.kids[2]), n.type, n.kids[2]->span, "if-branch"));
        return mk(std::move(out));
      }
      case AstKind::Prim: {
        out.prim = n.prim;
        switch (n.prim) {
          case PrimOp::AddI: case PrimOp::SubI: case PrimOp::MulI:
          case PrimOp::DivI: case PrimOp::ModI:
            out.kind = IrKind::Prim;
            out.label = blame(n.span, "prim");
            for (const AstPtr& k : n.kids)
              out.kids.push_back(coerce_to(lower(*k), kInt, k->span, "prim-arg"));
            return mk(std::move(out));
          case PrimOp::AddF: case PrimOp::SubF: case PrimOp::MulF:
          case PrimOp::DivF:
            out.kind = IrKind::Prim;
            out.label = blame(n.span, "prim");
            for (const AstPtr& k : n.kids)
              out.kids.push_back(
                  coerce_to(lower(*k), kFloat, k->span, "prim-arg"));
            return mk(std::move(out));
          case PrimOp::Not:
            out.kind = IrKind::Prim;
            out.kids.push_back(
                coerce_to(lower(*n.kids[0]), kBool, n.kids[0]->span, "prim-arg"));
            return mk(std::move(out));
          default: {
            TypeId a = n.kids[0]->type;
            TypeId b = n.kids[1]->type;
            TypeId want{};
            if (a == kFloat || b == kFloat) want = kFloat;
            else if (a == kInt || b == kInt) want = kInt;
            else {
              out.kind = IrKind::PrimCmpDyn;
              out.label = blame(n.span, "cmp");
              for (const AstPtr& k : n.kids) out.kids.push_back(lower(*k));
              return mk(std::move(out));
            }
            out.kind = IrKind::Prim;
            for (const AstPtr& k : n.kids)
              out.kids.push_back(coerce_to(lower(*k), want, k->span, "cmp-arg"));
            return mk(std::move(out));
          }
        }
      }
      case AstKind::TupleMake: {
        out.kind = IrKind::TupleMake;
        for (const AstPtr& k : n.kids) out.kids.push_back(lower(*k));
        return mk(std::move(out));
      }
      case AstKind::TupleProj: {
        TypeId t = n.kids[0]->type;
        out.index = static_cast<uint32_t>(n.proj_index);
        out.kids.push_back(lower(*n.kids[0]));
        if (t == kDyn) {
          out.kind = IrKind::TupleProjDyn;
          out.label = blame(n.span, "tuple-proj");
        } else {
          out.kind = IrKind::TupleProj;
        }
        return mk(std::move(out));
      }
      case AstKind::Ascribe:
        return coerce_to(lower(*n.kids[0]), *n.anno, n.span, "ascribe");
      case AstKind::RefMake: {
        out.kids.push_back(lower(*n.kids[0]));
        if (rr == RefRep::Proxied) {
          out.kind = IrKind::RefMake;
        } else {
          out.kind = IrKind::MonoRefMake;
          out.tgt = n.kids[0]->type;  // cell rtti starts at the static type
        }
        return mk(std::move(out));
      }
      case AstKind::RefRead: {
        TypeId t = n.kids[0]->type;
        IrPtr r = lower(*n.kids[0]);
        if (t == kDyn) {
          r = coerce_to(std::move(r), ref_dyn(), n.span, "deref");
          t = r->type;
        }
        out.kids.push_back(std::move(r));
        if (tt.head(t) == TypeHead::RefP) {
          out.kind = IrKind::RefRead;
        } else if (tt.is_static(tt.elem(t))) {
          out.kind = IrKind::MonoRead;
        } else {
          out.kind = IrKind::MonoReadTyped;
          out.tgt = tt.elem(t);
          out.label = blame(n.span, "deref");
        }
        return mk(std::move(out));
      }
      case AstKind::RefWrite: {
        TypeId t = n.kids[0]->type;
        IrPtr r = lower(*n.kids[0]);
        if (t == kDyn) {
          r = coerce_to(std::move(r), ref_dyn(), n.span, "set-ref");
          t = r->type;
        }
        TypeId elem = tt.elem(t);
        IrPtr v = coerce_to(lower(*n.kids[1]), elem, n.kids[1]->span, "set-ref");
        out.kids.push_back(std::move(r));
        out.kids.push_back(std::move(v));
        if (tt.head(t) == TypeHead::RefP) {
          out.kind = IrKind::RefWrite;
        } else if (tt.is_static(elem)) {
          out.kind = IrKind::MonoWrite;
        } else {
          out.kind = IrKind::MonoWriteTyped;
          out.src = elem;  // stated type of the written value
          out.label = blame(n.span, "set-ref");
        }
        return mk(std::move(out));
      }
      case AstKind::VectMake: {
        out.kids.push_back(
            coerce_to(lower(*n.kids[0]), kInt, n.kids[0]->span, "vect-size"));
        out.kids.push_back(lower(*n.kids[1]));
        if (rr == RefRep::Proxied) {
          out.kind = IrKind::VectMake;
        } else {
          out.kind = IrKind::MonoVectMake;
          out.tgt = n.kids[1]->type;
        }
        return mk(std::move(out));
      }
      case AstKind::VectRead: {
        TypeId t = n.kids[0]->type;
        IrPtr v = lower(*n.kids[0]);
        if (t == kDyn) {
          v = coerce_to(std::move(v), tt.vect(kDyn), n.span, "vect-ref");
          t = v->type;
        }
        out.kids.push_back(std::move(v));
        out.kids.push_back(
            coerce_to(lower(*n.kids[1]), kInt, n.kids[1]->span, "vect-idx"));
        if (rr == RefRep::Proxied) {
          out.kind = IrKind::VectRead;
        } else if (tt.is_static(tt.elem(t))) {
          out.kind = IrKind::MonoVectRead;
        } else {
          out.kind = IrKind::MonoVectReadTyped;
          out.tgt = tt.elem(t);
          out.label = blame(n.span, "vect-ref");
        }
        return mk(std::move(out));
      }
      case AstKind::VectWrite: {
        TypeId t = n.kids[0]->type;
        IrPtr v = lower(*n.kids[0]);
        if (t == kDyn) {
          v = coerce_to(std::move(v), tt.vect(kDyn), n.span, "vect-set");
          t = v->type;
        }
        TypeId elem = tt.elem(t);
        out.kids.push_back(std::move(v));
        out.kids.push_back(
            coerce_to(lower(*n.kids[1]), kInt, n.kids[1]->span, "vect-idx"));
        out.kids.push_back(
            coerce_to(lower(*n.kids[2]), elem, n.kids[2]->span, "vect-set"));
        if (rr == RefRep::Proxied) {
          out.kind = IrKind::VectWrite;
        } else if (tt.is_static(elem)) {
          out.kind = IrKind::MonoVectWrite;
        } else {
          out.kind = IrKind::MonoVectWriteTyped;
          out.src = elem;
          out.label = blame(n.span, "vect-set");
        }
        return mk(std::move(out));
      }
      case AstKind::VectLen: {
        TypeId t = n.kids[0]->type;
        IrPtr v = lower(*n.kids[0]);
        if (t == kDyn)
          v = coerce_to(std::move(v), tt.vect(kDyn), n.span, "vect-len");
        out.kids.push_back(std::move(v));
        out.kind = rr == RefRep::Proxied ? IrKind::VectLen : IrKind::MonoVectLen;
        return mk(std::move(out));
      }
      case AstKind::Begin: {
        out.kind = IrKind::Begin;
        for (const AstPtr& k : n.kids) out.kids.push_back(lower(*k));
        return mk(std::move(out));
      }
      case AstKind::While: {
        out.kind = IrKind::While;
        out.kids.push_back(coerce_to(lower(*n.kids[0]), kBool,
                                     n.kids[0]->span, "while-cond"));
        out.kids.push_back(lower(*n.kids[1]));
        return mk(std::move(out));
      }
    }
    assert(false && "unhandled surface form");
    return nullptr;
  }

  IrPtr lower_lambda(const AstNode& n, const std::string& name) {
    IrNode out;
    out.kind = IrKind::Lambda;
    out.type = n.type;
    out.span = n.span;
    out.arity = static_cast<uint32_t>(n.params.size());
    out.name = name;
    std::vector<std::string> names;
    for (const Param& p : n.params) names.push_back(p.name);
    frames.push_back(std::move(names));
    out.kids.push_back(coerce_to(lower(*n.kids[0]), tt.fun_ret(n.type),
                                 n.kids[0]->span, "return"));
    frames.pop_back();
    return mk(std::move(out));
  }

  IrPtr lower_define_fun(const Define& d) {
    IrNode out;
    out.kind = IrKind::Lambda;
    out.type = d.type;
    out.span = d.span;
    out.arity = static_cast<uint32_t>(d.params.size());
    out.name = d.name;
    std::vector<std::string> names;
    for (const Param& p : d.params) names.push_back(p.name);
    frames.push_back(std::move(names));
    out.kids.push_back(coerce_to(lower(*d.body), tt.fun_ret(d.type),
                                 d.body->span, "return"));
    frames.pop_back();
    return mk(std::move(out));
  }
};

}  // namespace

IrProgram insert_casts(TypeTable& types, const Program& program, RefRep ref_rep) {
  IrProgram ir;
  ir.file = program.file;
  ir.ref_rep = ref_rep;
  Lowerer lo{types, ref_rep, program.file, {}, {}};
  for (const Define& d : program.defines) {
    uint32_t idx = static_cast<uint32_t>(lo.globals.size());
    lo.globals.emplace(d.name, idx);
  }
  for (const Define& d : program.defines) {
    IrDefine def;
    def.name = d.name;
    def.type = d.type;
    if (d.is_fun) {
      def.init = lo.lower_define_fun(d);
    } else {
      def.init = lo.coerce_to(lo.lower(*d.body), d.type, d.span, "define");
    }
    ir.defines.push_back(std::move(def));
  }
  for (const AstPtr& e : program.exprs) ir.exprs.push_back(lo.lower(*e));
  return ir;
}

namespace {

bool all_dyn_fun(const TypeTable& tt, TypeId t, size_t arity) {
  if (tt.head(t) != TypeHead::Fun) return false;
  const TypeNode& n = tt.node(t);
  if (n.kids.size() != arity + 1) return false;
  for (TypeId k : n.kids)
    if (k != kDyn) return false;
  return true;
}

bool dyn_cast_to(const TypeTable& tt, const IrPtr& n, TypeHead head) {
  return n->kind == IrKind::Cast && n->src == kDyn &&
         tt.head(n->tgt) == head && tt.elem(n->tgt) == kDyn;
}

bool dyn_cast_to_ref(const TypeTable& tt, const IrPtr& n) {
  return dyn_cast_to(tt, n, TypeHead::RefP) || dyn_cast_to(tt, n, TypeHead::RefM);
}

struct DynOptimizer {
  TypeTable& tt;

  IrPtr opt(const IrPtr& p) {
    IrNode n = *p;
    for (IrPtr& k : n.kids) k = opt(k);
    switch (n.kind) {
      case IrKind::App: {
        const IrPtr& fn = n.kids[0];
        if (fn->kind == IrKind::Cast && fn->src == kDyn &&
            all_dyn_fun(tt, fn->tgt, n.kids.size() - 1)) {
          IrNode r = n;
          r.kind = IrKind::AppDyn;
          r.label = fn->label;
          r.kids[0] = fn->kids[0];
          return mk(std::move(r));
        }
        break;
      }
      case IrKind::RefRead:
        if (dyn_cast_to(tt, n.kids[0], TypeHead::RefP))
          return rewrite(n, IrKind::RefReadDyn);
        break;
      case IrKind::MonoReadTyped:
        if (n.tgt == kDyn && dyn_cast_to_ref(tt, n.kids[0]))
          return rewrite(n, IrKind::RefReadDyn);
        break;
      case IrKind::RefWrite:
        if (dyn_cast_to(tt, n.kids[0], TypeHead::RefP))
          return rewrite(n, IrKind::RefWriteDyn);
        break;
      case IrKind::MonoWriteTyped:
        if (n.src == kDyn && dyn_cast_to_ref(tt, n.kids[0]))
          return rewrite(n, IrKind::RefWriteDyn);
        break;
      case IrKind::VectRead:
        if (dyn_cast_to(tt, n.kids[0], TypeHead::Vect))
          return rewrite(n, IrKind::VectReadDyn);
        break;
      case IrKind::MonoVectReadTyped:
        if (n.tgt == kDyn && dyn_cast_to(tt, n.kids[0], TypeHead::Vect))
          return rewrite(n, IrKind::VectReadDyn);
        break;
      case IrKind::VectWrite:
        if (dyn_cast_to(tt, n.kids[0], TypeHead::Vect))
          return rewrite(n, IrKind::VectWriteDyn);
        break;
      case IrKind::MonoVectWriteTyped:
        if (n.src == kDyn && dyn_cast_to(tt, n.kids[0], TypeHead::Vect))
          return rewrite(n, IrKind::VectWriteDyn);
        break;
      case IrKind::VectLen:
      case IrKind::MonoVectLen:
        if (dyn_cast_to(tt, n.kids[0], TypeHead::Vect))
          return rewrite(n, IrKind::VectLenDyn);
        break;
      default:
        break;
    }
    return mk(std::move(n));
  }

  // Drops the reference cast and dispatches on the runtime type instead.
  IrPtr rewrite(const IrNode& n, IrKind kind) {
    IrNode r = n;
    r.kind = kind;
    r.label = n.kids[0]->label;
    r.kids[0] = n.kids[0]->kids[0];
    return mk(std::move(r));
  }
};

struct Specializer {
  TypeTable& tt;
  RefRep rr;
  std::vector<Coercion>& pool;

  void intern_pool(const Coercion& c) {
    for (const Coercion& p : pool)
      if (coercion_equal(p, c)) return;
    pool.push_back(c);
  }

  IrPtr opt(const IrPtr& p) {
    IrNode n = *p;
    for (IrPtr& k : n.kids) k = opt(k);
    if (n.kind != IrKind::Cast) return mk(std::move(n));
    Coercion c = make_coercion(tt, n.src, n.tgt, n.label, rr, nullptr);
    if (c.is_identity()) return n.kids[0];
    if (c.kind() == CoercionKind::Project && c.n().a.is_identity() &&
        tt.is_base(c.n().type_a)) {
      IrNode r = n;
      r.kind = IrKind::InlineProject;
      return mk(std::move(r));
    }
    if (c.kind() == CoercionKind::Inject && c.n().a.is_identity()) {
      IrNode r = n;
      r.kind = IrKind::InlineInject;
      return mk(std::move(r));
    }
    intern_pool(c);
    IrNode r = n;
    r.kind = IrKind::ApplyCoercionConst;
    r.coercion = std::move(c);
    return mk(std::move(r));
  }
};

void count_nodes(const IrPtr& n, IrKind kind, size_t& acc) {
  if (!n) return;
  if (n->kind == kind) acc++;
  for (const IrPtr& k : n->kids) count_nodes(k, kind, acc);
}

}  // namespace

IrProgram optimize_dyn(TypeTable& types, IrProgram program) {
  DynOptimizer o{types};
  for (IrDefine& d : program.defines) d.init = o.opt(d.init);
  for (IrPtr& e : program.exprs) e = o.opt(e);
  return program;
}

IrProgram specialize_casts(TypeTable& types, IrProgram program) {
  Specializer s{types, program.ref_rep, program.coercion_pool};
  for (IrDefine& d : program.defines) d.init = s.opt(d.init);
  for (IrPtr& e : program.exprs) e = s.opt(e);
  return program;
}

size_t count_ir_nodes(const IrProgram& p, IrKind kind) {
  size_t acc = 0;
  for (const IrDefine& d : p.defines) count_nodes(d.init, kind, acc);
  for (const IrPtr& e : p.exprs) count_nodes(e, kind, acc);
  return acc;
}

}  // namespace gradl
