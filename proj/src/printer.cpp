#include "gradl/printer.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace gradl {

std::string show_double(double d) {
  char buf[64];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, d);
    if (std::strtod(buf, nullptr) == d) break;
  }
  return buf;
}

namespace {

// Float literals must re-read as floats, not ints.
std::string float_literal(double d) {
  std::string s = show_double(d);
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
    s += ".0";
  return s;
}

const char* prim_name(PrimOp p) {
  switch (p) {
    case PrimOp::AddI: return "+";
    case PrimOp::SubI: return "-";
    case PrimOp::MulI: return "*";
    case PrimOp::DivI: return "/";
    case PrimOp::ModI: return "%";
    case PrimOp::AddF: return "+.";
    case PrimOp::SubF: return "-.";
    case PrimOp::MulF: return "*.";
    case PrimOp::DivF: return "/.";
    case PrimOp::Eq: return "=";
    case PrimOp::Lt: return "<";
    case PrimOp::Gt: return ">";
    case PrimOp::Le: return "<=";
    case PrimOp::Ge: return ">=";
    case PrimOp::Not: return "not";
  }
  return "?";
}

std::string show_param(const TypeTable& tt, const Param& p) {
  if (!p.anno) return p.name;
  return "[" + p.name + " : " + tt.show(*p.anno) + "]";
}

struct AstPrinter {
  const TypeTable& tt;

  std::string print(const AstNode& n) {
    switch (n.kind) {
      case AstKind::IntLit: return std::to_string(n.ival);
      case AstKind::FloatLit: return float_literal(n.fval);
      case AstKind::BoolLit: return n.bval ? "#t" : "#f";
      case AstKind::UnitLit: return "()";
      case AstKind::Var: return n.name;
      case AstKind::Lambda: {
        std::string s = "(lambda (";
        for (size_t i = 0; i < n.params.size(); ++i) {
          if (i) s += " ";
          s += show_param(tt, n.params[i]);
        }
        s += ")";
        if (n.ret_anno) s += " : " + tt.show(*n.ret_anno);
        return s + " " + print(*n.kids[0]) + ")";
      }
      case AstKind::App: {
        std::string s = "(";
        for (size_t i = 0; i < n.kids.size(); ++i) {
          if (i) s += " ";
          s += print(*n.kids[i]);
        }
        return s + ")";
      }
      case AstKind::Let: {
        std::string s = "(let (";
        for (size_t i = 0; i < n.binds.size(); ++i) {
          const Binding& b = n.binds[i];
          if (i) s += " ";
          s += "[" + b.name;
          if (b.anno) s += " : " + tt.show(*b.anno);
          s += " " + print(*b.init) + "]";
        }
        return s + ") " + print(*n.kids[0]) + ")";
      }
      case AstKind::If:
        return "(if " + print(*n.kids[0]) + " " + print(*n.kids[1]) + " " +
               print(*n.kids[2]) + ")";
      case AstKind::Prim: {
        std::string s = std::string("(") + prim_name(n.prim);
        for (const AstPtr& k : n.kids) s += " " + print(*k);
        return s + ")";
      }
      case AstKind::TupleMake: {
        std::string s = "(tuple";
        for (const AstPtr& k : n.kids) s += " " + print(*k);
        return s + ")";
      }
      case AstKind::TupleProj:
        return "(tuple-proj " + print(*n.kids[0]) + " " +
               std::to_string(n.proj_index) + ")";
      case AstKind::Ascribe:
        return "(: " + print(*n.kids[0]) + " " + tt.show(*n.anno) + ")";
      case AstKind::RefMake: return "(ref " + print(*n.kids[0]) + ")";
      case AstKind::RefRead: return "(deref " + print(*n.kids[0]) + ")";
      case AstKind::RefWrite:
        return "(set-ref! " + print(*n.kids[0]) + " " + print(*n.kids[1]) + ")";
      case AstKind::VectMake:
        return "(vect " + print(*n.kids[0]) + " " + print(*n.kids[1]) + ")";
      case AstKind::VectRead:
        return "(vect-ref " + print(*n.kids[0]) + " " + print(*n.kids[1]) + ")";
      case AstKind::VectWrite:
        return "(vect-set! " + print(*n.kids[0]) + " " + print(*n.kids[1]) +
               " " + print(*n.kids[2]) + ")";
      case AstKind::VectLen: return "(vect-len " + print(*n.kids[0]) + ")";
      case AstKind::Begin: {
        std::string s = "(begin";
        for (const AstPtr& k : n.kids) s += " " + print(*k);
        return s + ")";
      }
      case AstKind::While:
        return "(while " + print(*n.kids[0]) + " " + print(*n.kids[1]) + ")";
    }
    return "?";
  }
};

std::string show_value_rec(const TypeTable& tt, const Heap& heap,
                           const Value& v, int depth) {
  if (depth > 24) return "...";
  switch (v.kind) {
    case ValueKind::Unit: return "()";
    case ValueKind::Bool: return v.s.b ? "#t" : "#f";
    case ValueKind::Int: return std::to_string(v.s.i);
    case ValueKind::Float: return float_literal(v.s.f);
    case ValueKind::Addr: {
      const HeapCell& c = heap.cell(v.s.addr);
      if (c.vect) {
        std::string s = "#(";
        for (size_t i = 0; i < c.slots.size(); ++i) {
          if (i) s += " ";
          s += show_value_rec(tt, heap, c.slots[i], depth + 1);
        }
        return s + ")";
      }
      return "(ref " + show_value_rec(tt, heap, c.slots[0], depth + 1) + ")";
    }
    case ValueKind::Tuple: {
      std::string s = "(tuple";
      for (const Value& e : as_tuple(v).elems)
        s += " " + show_value_rec(tt, heap, e, depth + 1);
      return s + ")";
    }
    case ValueKind::Closure:
    case ValueKind::FunProxy:
      return "#<procedure>";
    case ValueKind::RefProxy:
      return show_value_rec(tt, heap, as_ref_proxy(v).ref, depth + 1);
  }
  return "?";
}

}  // namespace

std::string show_ast(const TypeTable& types, const AstPtr& n, int) {
  return AstPrinter{types}.print(*n);
}

std::string show_program(const TypeTable& types, const Program& p) {
  AstPrinter pr{types};
  std::string out;
  for (const Define& d : p.defines) {
    if (d.is_fun) {
      out += "(define (" + d.name;
      for (const Param& pa : d.params) out += " " + show_param(types, pa);
      out += ")";
      if (d.ret_anno) out += " : " + types.show(*d.ret_anno);
      out += "\n  " + pr.print(*d.body) + ")\n";
    } else if (d.ret_anno) {
      out += "(define [" + d.name + " : " + types.show(*d.ret_anno) + "] " +
             pr.print(*d.body) + ")\n";
    } else {
      out += "(define " + d.name + " " + pr.print(*d.body) + ")\n";
    }
  }
  for (const AstPtr& e : p.exprs) out += pr.print(*e) + "\n";
  return out;
}

std::string show_value(const TypeTable& types, const Heap& heap, const Value& v) {
  return show_value_rec(types, heap, v, 0);
}

std::string show_outcome(const TypeTable& types, const Heap& heap,
                         const Outcome& o) {
  switch (o.kind) {
    case Outcome::Kind::Result: return show_value(types, heap, o.value);
    case Outcome::Kind::Blame: return "blame " + o.label;
    case Outcome::Kind::DynError: return "error: " + o.message;
  }
  return "?";
}

std::string show_outcome_kind(const Outcome& o) {
  switch (o.kind) {
    case Outcome::Kind::Result: return "result";
    case Outcome::Kind::Blame: return "blame";
    case Outcome::Kind::DynError: return "error";
  }
  return "?";
}

}  // namespace gradl
