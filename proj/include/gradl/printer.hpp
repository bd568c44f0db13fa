#pragma once

#include <string>

#include "gradl/ast.hpp"
#include "gradl/value.hpp"

namespace gradl {

// Canonical program printer: parse(print(parse(x))) is parse(x), and printing
// is deterministic, so sampled configurations can be written back out as
// .grift files.
std::string show_program(const TypeTable& types, const Program& p);
std::string show_ast(const TypeTable& types, const AstPtr& n, int indent = 0);

// Shortest float spelling that round-trips through strtod.
std::string show_double(double d);

std::string show_value(const TypeTable& types, const Heap& heap, const Value& v);

// Result values print in surface syntax; the other outcomes print as
// "blame <label>" and "error: <message>".
std::string show_outcome(const TypeTable& types, const Heap& heap, const Outcome& o);
std::string show_outcome_kind(const Outcome& o);

}  // namespace gradl
