#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "opode/expr.hpp"
#include "opode/parse.hpp"

namespace opode {

enum class Format { Plain, Latex, Json };

std::string render(const Expr &e, Format f = Format::Plain);

/// Document form: {"kind": ..., "children": [...]} plus kind-specific
/// fields ("value" for integers, "num"/"den" for rationals, "name", "var").
/// Integers are decimal strings.
nlohmann::json to_json(const Expr &e);
Expr from_json(const nlohmann::json &j);

std::string render_ode(const ODEProblem &p);

}  // namespace opode
