#include "evolv/scenario.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace evolv {

// ---- expression language ----------------------------------------------------

struct Expr::Node {
  enum class Op { constant, var_t, add, sub, mul, div, neg, fn_sin, fn_cos, fn_exp, fn_abs };
  Op op = Op::constant;
  double value = 0.0;
  std::shared_ptr<const Node> a, b;
};

namespace {

using ExprNode = Expr::Node;
using NodeRef = std::shared_ptr<const ExprNode>;

NodeRef make_leaf(ExprNode::Op op, double value = 0.0) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->value = value;
  return n;
}

NodeRef make_inner(ExprNode::Op op, NodeRef a, NodeRef b = nullptr) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

class ExprParser {
 public:
  explicit ExprParser(const std::string& text) : text_(text) {}

  NodeRef run() {
    NodeRef e = parse_sum();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw SchemaError("expression '" + text_ + "' at position " + std::to_string(pos_) + ": " +
                      what);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodeRef parse_sum() {
    NodeRef lhs = parse_term();
    for (;;) {
      if (consume('+')) {
        lhs = make_inner(ExprNode::Op::add, lhs, parse_term());
      } else if (consume('-')) {
        lhs = make_inner(ExprNode::Op::sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  NodeRef parse_term() {
    NodeRef lhs = parse_unary();
    for (;;) {
      if (consume('*')) {
        lhs = make_inner(ExprNode::Op::mul, lhs, parse_unary());
      } else if (consume('/')) {
        lhs = make_inner(ExprNode::Op::div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  NodeRef parse_unary() {
    if (consume('-')) return make_inner(ExprNode::Op::neg, parse_unary());
    if (consume('+')) return parse_unary();
    return parse_primary();
  }

  NodeRef parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("expected a value");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
    if (consume('(')) {
      NodeRef e = parse_sum();
      if (!consume(')')) fail("missing closing parenthesis");
      return e;
    }
    fail("unexpected character");
  }

  NodeRef parse_number() {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text_.substr(pos_), &used);
    } catch (const std::exception&) {
      fail("malformed number");
    }
    pos_ += used;
    return make_leaf(ExprNode::Op::constant, v);
  }

  NodeRef parse_ident() {
    std::size_t end = pos_;
    while (end < text_.size() && std::isalpha(static_cast<unsigned char>(text_[end]))) ++end;
    const std::string name = text_.substr(pos_, end - pos_);
    pos_ = end;
    if (name == "t") return make_leaf(ExprNode::Op::var_t);

    ExprNode::Op op;
    if (name == "sin") {
      op = ExprNode::Op::fn_sin;
    } else if (name == "cos") {
      op = ExprNode::Op::fn_cos;
    } else if (name == "exp") {
      op = ExprNode::Op::fn_exp;
    } else if (name == "abs") {
      op = ExprNode::Op::fn_abs;
    } else {
      fail("unknown identifier '" + name + "'");
    }
    if (!consume('(')) fail("expected '(' after function name");
    NodeRef arg = parse_sum();
    if (!consume(')')) fail("missing closing parenthesis");
    return make_inner(op, std::move(arg));
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

double eval_node(const ExprNode& n, double t) {
  switch (n.op) {
    case ExprNode::Op::constant:
      return n.value;
    case ExprNode::Op::var_t:
      return t;
    case ExprNode::Op::add:
      return eval_node(*n.a, t) + eval_node(*n.b, t);
    case ExprNode::Op::sub:
      return eval_node(*n.a, t) - eval_node(*n.b, t);
    case ExprNode::Op::mul:
      return eval_node(*n.a, t) * eval_node(*n.b, t);
    case ExprNode::Op::div:
      return eval_node(*n.a, t) / eval_node(*n.b, t);
    case ExprNode::Op::neg:
      return -eval_node(*n.a, t);
    case ExprNode::Op::fn_sin:
      return std::sin(eval_node(*n.a, t));
    case ExprNode::Op::fn_cos:
      return std::cos(eval_node(*n.a, t));
    case ExprNode::Op::fn_exp:
      return std::exp(eval_node(*n.a, t));
    case ExprNode::Op::fn_abs:
      return std::abs(eval_node(*n.a, t));
  }
  return 0.0;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Expr::Expr(std::shared_ptr<const Node> root, std::string text)
    : root_(std::move(root)), text_(std::move(text)) {}

Expr Expr::parse(const std::string& text) { return Expr(ExprParser(text).run(), text); }

Expr Expr::constant(double value) {
  return Expr(make_leaf(ExprNode::Op::constant, value), format_double(value));
}

double Expr::eval(double t) const { return eval_node(*root_, t); }

// ---- json schema helpers ----------------------------------------------------

namespace {

[[noreturn]] void schema_fail(const std::string& ctx, const std::string& what) {
  throw SchemaError(ctx + ": " + what);
}

void check_keys(const Json& obj, const std::vector<std::string>& allowed,
                const std::string& ctx) {
  if (!obj.is_object()) schema_fail(ctx, "expected an object");
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const std::string& key : allowed) {
      if (item.key() == key) {
        ok = true;
        break;
      }
    }
    if (!ok) schema_fail(ctx, "unknown key '" + item.key() + "'");
  }
}

const Json& require_key(const Json& obj, const std::string& key, const std::string& ctx) {
  if (!obj.is_object() || !obj.contains(key)) schema_fail(ctx, "missing key '" + key + "'");
  return obj.at(key);
}

double as_number(const Json& j, const std::string& ctx) {
  if (!j.is_number()) schema_fail(ctx, "expected a number");
  return j.get<double>();
}

Index as_index(const Json& j, const std::string& ctx) {
  if (!j.is_number_integer()) schema_fail(ctx, "expected an integer");
  return j.get<Index>();
}

std::string as_string(const Json& j, const std::string& ctx) {
  if (!j.is_string()) schema_fail(ctx, "expected a string");
  return j.get<std::string>();
}

Complex parse_complex_entry(const Json& j, const std::string& ctx) {
  if (j.is_number()) return Complex(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return Complex(j[0].get<double>(), j[1].get<double>());
  }
  schema_fail(ctx, "expected a number or an [re, im] pair");
}

Matrix parse_matrix(const Json& j, const std::string& ctx) {
  if (!j.is_array() || j.empty()) schema_fail(ctx, "expected a non-empty array of rows");
  const Index rows = static_cast<Index>(j.size());
  Index cols = -1;
  Matrix m;
  for (Index r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || row.empty()) schema_fail(ctx, "row " + std::to_string(r) + " is not an array");
    if (cols < 0) {
      cols = static_cast<Index>(row.size());
      m.resize(rows, cols);
    } else if (static_cast<Index>(row.size()) != cols) {
      schema_fail(ctx, "ragged rows");
    }
    for (Index c = 0; c < cols; ++c) {
      m(r, c) = parse_complex_entry(row[static_cast<std::size_t>(c)],
                                    ctx + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
  }
  return m;
}

Json emit_complex(const Complex& z) {
  if (z.imag() == 0.0) return Json(z.real());
  return Json::array({z.real(), z.imag()});
}

Json emit_matrix(const Matrix& m) {
  Json rows = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(emit_complex(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Expr parse_expr_entry(const Json& j, const std::string& ctx) {
  if (j.is_number()) return Expr::constant(j.get<double>());
  if (j.is_string()) return Expr::parse(j.get<std::string>());
  schema_fail(ctx, "expected an expression string or a number");
}

ExprMatrix parse_expr_matrix(const Json& j, Index dim, const std::string& ctx) {
  if (!j.is_array() || static_cast<Index>(j.size()) != dim) {
    schema_fail(ctx, "expected " + std::to_string(dim) + " rows");
  }
  ExprMatrix m;
  for (Index r = 0; r < dim; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != dim) {
      schema_fail(ctx, "row " + std::to_string(r) + " must have " + std::to_string(dim) +
                           " entries");
    }
    std::vector<Expr> out;
    for (Index c = 0; c < dim; ++c) {
      out.push_back(parse_expr_entry(row[static_cast<std::size_t>(c)],
                                     ctx + "[" + std::to_string(r) + "][" + std::to_string(c) +
                                         "]"));
    }
    m.push_back(std::move(out));
  }
  return m;
}

Json emit_expr(const Expr& e) {
  // Plain literals normalize to JSON numbers, everything else stays text.
  const std::string& text = e.text();
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return Json(v);
  } catch (const std::exception&) {
  }
  return Json(text);
}

Json emit_expr_matrix(const ExprMatrix& m) {
  Json rows = Json::array();
  for (const auto& row : m) {
    Json r = Json::array();
    for (const Expr& e : row) r.push_back(emit_expr(e));
    rows.push_back(std::move(r));
  }
  return rows;
}

MatrixFunction expr_matrix_function(const ExprMatrix& m) {
  const Index dim = static_cast<Index>(m.size());
  return [m, dim](double t) {
    Matrix out(dim, dim);
    for (Index r = 0; r < dim; ++r) {
      for (Index c = 0; c < dim; ++c) {
        out(r, c) = Complex(m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].eval(t),
                            0.0);
      }
    }
    return out;
  };
}

KernelSpec parse_kernel(const Json& j, Index dim, const std::string& ctx) {
  check_keys(j, {"delta", "conv", "blocks"}, ctx);
  KernelSpec spec;
  if (j.contains("delta")) {
    const Json& d = j.at("delta");
    if (d.is_number()) {
      spec.delta = d.get<double>() * Matrix::Identity(dim, dim);
    } else {
      spec.delta = parse_matrix(d, ctx + ".delta");
      if (spec.delta->rows() != dim || spec.delta->cols() != dim) {
        schema_fail(ctx + ".delta", "expected a " + std::to_string(dim) + "-dim square matrix");
      }
    }
  }
  if (j.contains("conv")) {
    const Json& c = j.at("conv");
    check_keys(c, {"type", "amplitude", "rate"}, ctx + ".conv");
    if (as_string(require_key(c, "type", ctx + ".conv"), ctx + ".conv.type") != "exp") {
      schema_fail(ctx + ".conv.type", "only 'exp' kernels are supported");
    }
    KernelSpec::Conv conv;
    conv.amplitude = as_number(require_key(c, "amplitude", ctx + ".conv"), ctx + ".conv.amplitude");
    conv.rate = as_number(require_key(c, "rate", ctx + ".conv"), ctx + ".conv.rate");
    spec.conv = conv;
  }
  if (j.contains("blocks")) {
    const Json& b = j.at("blocks");
    if (!b.is_array()) schema_fail(ctx + ".blocks", "expected an array of matrices");
    for (std::size_t i = 0; i < b.size(); ++i) {
      Matrix block = parse_matrix(b[i], ctx + ".blocks[" + std::to_string(i) + "]");
      if (block.rows() != dim || block.cols() != dim) {
        schema_fail(ctx + ".blocks", "block " + std::to_string(i) + " has wrong dimension");
      }
      spec.blocks.push_back(std::move(block));
    }
  }
  if (!spec.delta && !spec.conv && spec.blocks.empty()) {
    schema_fail(ctx, "kernel needs at least one of delta, conv, blocks");
  }
  return spec;
}

Json emit_kernel(const KernelSpec& spec) {
  Json j = Json::object();
  if (spec.delta) j["delta"] = emit_matrix(*spec.delta);
  if (spec.conv) {
    j["conv"] = Json{{"type", "exp"}, {"amplitude", spec.conv->amplitude},
                     {"rate", spec.conv->rate}};
  }
  if (!spec.blocks.empty()) {
    Json blocks = Json::array();
    for (const Matrix& b : spec.blocks) blocks.push_back(emit_matrix(b));
    j["blocks"] = std::move(blocks);
  }
  return j;
}

MaterialSpec parse_material(const Json& j, Index dim, const std::string& ctx) {
  const std::string kind = as_string(require_key(j, "kind", ctx), ctx + ".kind");
  MaterialSpec spec;
  spec.dim = dim;
  if (j.contains("min_nu")) spec.min_nu = as_number(j.at("min_nu"), ctx + ".min_nu");

  if (kind == "autonomous") {
    check_keys(j, {"kind", "dim", "min_nu", "M_kernel", "N_kernel"}, ctx);
    spec.kind = MaterialLaw::Kind::autonomous;
    spec.m_kernel = parse_kernel(require_key(j, "M_kernel", ctx), dim, ctx + ".M_kernel");
    spec.n_kernel = parse_kernel(require_key(j, "N_kernel", ctx), dim, ctx + ".N_kernel");
  } else if (kind == "nonautonomous") {
    check_keys(j, {"kind", "dim", "min_nu", "M0", "M0dot", "M1"}, ctx);
    spec.kind = MaterialLaw::Kind::nonautonomous;
    spec.m0 = parse_expr_matrix(require_key(j, "M0", ctx), dim, ctx + ".M0");
    spec.m1 = parse_expr_matrix(require_key(j, "M1", ctx), dim, ctx + ".M1");
    const Json& m0dot = require_key(j, "M0dot", ctx);
    if (m0dot.is_string() && m0dot.get<std::string>() == "finite-difference") {
      spec.m0dot_finite_difference = true;
    } else {
      spec.m0dot = parse_expr_matrix(m0dot, dim, ctx + ".M0dot");
    }
  } else if (kind == "block") {
    check_keys(j, {"kind", "dim", "min_nu", "components"}, ctx);
    spec.kind = MaterialLaw::Kind::block;
    const Json& comps = require_key(j, "components", ctx);
    if (!comps.is_array() || comps.size() < 2) {
      schema_fail(ctx + ".components", "expected at least two components");
    }
    Index total = 0;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      const std::string cctx = ctx + ".components[" + std::to_string(i) + "]";
      const Index cdim = as_index(require_key(comps[i], "dim", cctx), cctx + ".dim");
      if (cdim < 0) schema_fail(cctx + ".dim", "negative dimension");
      spec.components.push_back(parse_material(comps[i], cdim, cctx));
      total += cdim;
    }
    if (total != dim) {
      schema_fail(ctx, "component dimensions sum to " + std::to_string(total) +
                           ", expected " + std::to_string(dim));
    }
  } else {
    schema_fail(ctx + ".kind", "unknown material kind '" + kind + "'");
  }
  return spec;
}

Json emit_material(const MaterialSpec& spec, bool include_dim) {
  Json j = Json::object();
  switch (spec.kind) {
    case MaterialLaw::Kind::autonomous:
      j["kind"] = "autonomous";
      if (include_dim) j["dim"] = spec.dim;
      j["min_nu"] = spec.min_nu;
      j["M_kernel"] = emit_kernel(spec.m_kernel);
      j["N_kernel"] = emit_kernel(spec.n_kernel);
      break;
    case MaterialLaw::Kind::nonautonomous:
      j["kind"] = "nonautonomous";
      if (include_dim) j["dim"] = spec.dim;
      j["min_nu"] = spec.min_nu;
      j["M0"] = emit_expr_matrix(spec.m0);
      j["M0dot"] = spec.m0dot_finite_difference ? Json("finite-difference")
                                                : emit_expr_matrix(spec.m0dot);
      j["M1"] = emit_expr_matrix(spec.m1);
      break;
    case MaterialLaw::Kind::block: {
      j["kind"] = "block";
      if (include_dim) j["dim"] = spec.dim;
      j["min_nu"] = spec.min_nu;
      Json comps = Json::array();
      for (const MaterialSpec& c : spec.components) comps.push_back(emit_material(c, true));
      j["components"] = std::move(comps);
      break;
    }
  }
  return j;
}

SpatialSpec parse_spatial(const Json& j, const std::string& ctx) {
  const std::string kind = as_string(require_key(j, "kind", ctx), ctx + ".kind");
  SpatialSpec spec;
  if (kind == "matrix") {
    check_keys(j, {"kind", "value"}, ctx);
    spec.kind = SpatialSpec::Kind::matrix;
    spec.value = parse_matrix(require_key(j, "value", ctx), ctx + ".value");
  } else if (kind == "grad_div_1d") {
    check_keys(j, {"kind", "points", "bc", "coefficient"}, ctx);
    spec.kind = SpatialSpec::Kind::grad_div_1d;
    spec.points = as_index(require_key(j, "points", ctx), ctx + ".points");
    if (j.contains("bc")) spec.bc = as_string(j.at("bc"), ctx + ".bc");
    if (spec.bc != "dirichlet" && spec.bc != "neumann") {
      schema_fail(ctx + ".bc", "expected 'dirichlet' or 'neumann'");
    }
    if (j.contains("coefficient")) {
      spec.coefficient = as_number(j.at("coefficient"), ctx + ".coefficient");
    }
  } else {
    schema_fail(ctx + ".kind", "unknown spatial kind '" + kind + "'");
  }
  return spec;
}

Json emit_spatial(const SpatialSpec& spec) {
  Json j = Json::object();
  if (spec.kind == SpatialSpec::Kind::matrix) {
    j["kind"] = "matrix";
    j["value"] = emit_matrix(spec.value);
  } else {
    j["kind"] = "grad_div_1d";
    j["points"] = spec.points;
    j["bc"] = spec.bc;
    j["coefficient"] = spec.coefficient;
  }
  return j;
}

SourceSpec parse_source(const Json& j, Index dim, const std::string& ctx) {
  const std::string kind = as_string(require_key(j, "kind", ctx), ctx + ".kind");
  SourceSpec spec;
  if (kind == "expression") {
    check_keys(j, {"kind", "components"}, ctx);
    spec.kind = SourceSpec::Kind::expression;
    const Json& comps = require_key(j, "components", ctx);
    if (!comps.is_array() || static_cast<Index>(comps.size()) != dim) {
      schema_fail(ctx + ".components", "expected " + std::to_string(dim) + " component expressions");
    }
    for (std::size_t i = 0; i < comps.size(); ++i) {
      spec.components.push_back(
          parse_expr_entry(comps[i], ctx + ".components[" + std::to_string(i) + "]"));
    }
  } else if (kind == "impulse") {
    check_keys(j, {"kind", "k", "component", "value"}, ctx);
    spec.kind = SourceSpec::Kind::impulse;
    spec.k = as_index(require_key(j, "k", ctx), ctx + ".k");
    if (j.contains("component")) spec.component = as_index(j.at("component"), ctx + ".component");
    if (j.contains("value")) spec.value = parse_complex_entry(j.at("value"), ctx + ".value");
  } else if (kind == "csv") {
    check_keys(j, {"kind", "path"}, ctx);
    spec.kind = SourceSpec::Kind::csv;
    spec.path = as_string(require_key(j, "path", ctx), ctx + ".path");
  } else {
    schema_fail(ctx + ".kind", "unknown source kind '" + kind + "'");
  }
  return spec;
}

Json emit_source(const SourceSpec& spec) {
  Json j = Json::object();
  switch (spec.kind) {
    case SourceSpec::Kind::expression: {
      j["kind"] = "expression";
      Json comps = Json::array();
      for (const Expr& e : spec.components) comps.push_back(emit_expr(e));
      j["components"] = std::move(comps);
      break;
    }
    case SourceSpec::Kind::impulse:
      j["kind"] = "impulse";
      j["k"] = spec.k;
      j["component"] = spec.component;
      j["value"] = emit_complex(spec.value);
      break;
    case SourceSpec::Kind::csv:
      j["kind"] = "csv";
      j["path"] = spec.path;
      break;
  }
  return j;
}

}  // namespace

// ---- realization ----------------------------------------------------------

std::vector<Matrix> KernelSpec::realize(const TimeGrid& grid, Index dim) const {
  if (static_cast<Index>(blocks.size()) > grid.n()) {
    throw SchemaError("kernel has more blocks than grid points");
  }
  std::vector<Matrix> out(static_cast<std::size_t>(grid.n()), Matrix::Zero(dim, dim));
  if (delta) out[0] += *delta;
  if (conv) {
    for (Index m = 0; m < grid.n(); ++m) {
      out[static_cast<std::size_t>(m)] +=
          conv->amplitude * grid.h() *
          std::exp(-conv->rate * static_cast<double>(m) * grid.h()) * Matrix::Identity(dim, dim);
    }
  }
  for (std::size_t i = 0; i < blocks.size(); ++i) out[i] += blocks[i];
  return out;
}

MaterialLaw MaterialSpec::realize(const TimeGrid& grid) const {
  switch (kind) {
    case MaterialLaw::Kind::autonomous:
      return autonomous_law(grid, m_kernel.realize(grid, dim), n_kernel.realize(grid, dim),
                            min_nu, "autonomous");
    case MaterialLaw::Kind::nonautonomous: {
      std::optional<MatrixFunction> m0dot_fn;
      if (!m0dot_finite_difference) m0dot_fn = expr_matrix_function(m0dot);
      return nonautonomous_law(grid, expr_matrix_function(m0), m0dot_fn,
                               expr_matrix_function(m1), dim, min_nu, "nonautonomous");
    }
    case MaterialLaw::Kind::block: {
      MaterialLaw law = components.front().realize(grid);
      for (std::size_t i = 1; i < components.size(); ++i) {
        law = block_direct_sum(law, components[i].realize(grid));
      }
      if (min_nu > law.min_nu) law.min_nu = min_nu;
      return law;
    }
  }
  throw SchemaError("unreachable material kind");
}

GradDiv1D make_grad_div_1d(Index points, const std::string& bc, double coefficient) {
  if (points < 2) throw SchemaError("grad_div_1d needs at least 2 points");
  GradDiv1D out;
  const double dx = 1.0 / static_cast<double>(points);
  out.dx = dx;
  if (bc == "dirichlet") {
    // Potential at interior nodes i*dx, flux at cell midpoints (i + 1/2)*dx.
    out.n_potential = points - 1;
    out.n_flux = points;
    out.grad = Eigen::MatrixXd::Zero(out.n_flux, out.n_potential);
    for (Index f = 0; f < out.n_flux; ++f) {
      if (f < out.n_potential) out.grad(f, f) = 1.0 / dx;
      if (f >= 1) out.grad(f, f - 1) = -1.0 / dx;
    }
    for (Index i = 1; i < points; ++i) out.potential_nodes.push_back(static_cast<double>(i) * dx);
    for (Index f = 0; f < points; ++f) {
      out.flux_nodes.push_back((static_cast<double>(f) + 0.5) * dx);
    }
  } else if (bc == "neumann") {
    // Potential at cell midpoints, flux at interior faces; boundary flux 0.
    out.n_potential = points;
    out.n_flux = points - 1;
    out.grad = Eigen::MatrixXd::Zero(out.n_flux, out.n_potential);
    for (Index f = 0; f < out.n_flux; ++f) {
      out.grad(f, f + 1) = 1.0 / dx;
      out.grad(f, f) = -1.0 / dx;
    }
    for (Index i = 0; i < points; ++i) {
      out.potential_nodes.push_back((static_cast<double>(i) + 0.5) * dx);
    }
    for (Index f = 1; f < points; ++f) out.flux_nodes.push_back(static_cast<double>(f) * dx);
  } else {
    throw SchemaError("grad_div_1d bc must be 'dirichlet' or 'neumann'");
  }

  const Index d = out.n_potential + out.n_flux;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
  a.topRightCorner(out.n_potential, out.n_flux) = -out.grad.transpose();  // div
  a.bottomLeftCorner(out.n_flux, out.n_potential) = out.grad;
  out.coupled = (coefficient * a).cast<Complex>();
  return out;
}

Matrix SpatialSpec::realize(Index state_dim) const {
  if (kind == Kind::matrix) {
    if (value.rows() != state_dim || value.cols() != state_dim) {
      throw SchemaError("spatial matrix does not match state_dim");
    }
    return value;
  }
  const GradDiv1D gd = make_grad_div_1d(points, bc, coefficient);
  if (gd.coupled.rows() != state_dim) {
    throw SchemaError("grad_div_1d stencil has dimension " + std::to_string(gd.coupled.rows()) +
                      ", expected state_dim = " + std::to_string(state_dim));
  }
  return gd.coupled;
}

Trajectory SourceSpec::realize(const TimeGrid& grid, Index dim,
                               const std::filesystem::path& base_dir) const {
  switch (kind) {
    case Kind::expression: {
      if (static_cast<Index>(components.size()) != dim) {
        throw SchemaError("source expression count does not match state_dim");
      }
      Matrix v(dim, grid.n());
      for (Index k = 0; k < grid.n(); ++k) {
        for (Index i = 0; i < dim; ++i) {
          v(i, k) = Complex(components[static_cast<std::size_t>(i)].eval(grid.time(k)), 0.0);
        }
      }
      return Trajectory(grid, std::move(v));
    }
    case Kind::impulse: {
      if (k < 0 || k >= grid.n()) throw SchemaError("impulse index k outside the grid");
      if (component < 0 || component >= dim) throw SchemaError("impulse component out of range");
      Matrix v = Matrix::Zero(dim, grid.n());
      v(component, k) = value;
      return Trajectory(grid, std::move(v));
    }
    case Kind::csv:
      return read_trajectory_csv(base_dir / path, grid, dim);
  }
  throw SchemaError("unreachable source kind");
}

// ---- scenario --------------------------------------------------------------

Scenario Scenario::from_json(const Json& j) {
  check_keys(j, {"format", "label", "grid", "nu", "state_dim", "material", "spatial", "source",
                 "outputs"},
             "scenario");
  if (as_index(require_key(j, "format", "scenario"), "scenario.format") != 1) {
    schema_fail("scenario.format", "unsupported format version");
  }

  Scenario s;
  s.label = as_string(require_key(j, "label", "scenario"), "scenario.label");

  const Json& grid = require_key(j, "grid", "scenario");
  check_keys(grid, {"t0", "h", "n"}, "scenario.grid");
  s.t0 = as_number(require_key(grid, "t0", "scenario.grid"), "scenario.grid.t0");
  s.h = as_number(require_key(grid, "h", "scenario.grid"), "scenario.grid.h");
  s.n = as_index(require_key(grid, "n", "scenario.grid"), "scenario.grid.n");

  const Json& nu = require_key(j, "nu", "scenario");
  if (nu.is_number()) {
    s.nus.push_back(nu.get<double>());
  } else if (nu.is_array() && !nu.empty()) {
    for (const Json& x : nu) s.nus.push_back(as_number(x, "scenario.nu"));
  } else {
    schema_fail("scenario.nu", "expected a number or a non-empty array");
  }

  s.state_dim = as_index(require_key(j, "state_dim", "scenario"), "scenario.state_dim");
  if (s.state_dim < 1) schema_fail("scenario.state_dim", "must be positive");

  s.material = parse_material(require_key(j, "material", "scenario"), s.state_dim,
                              "scenario.material");
  s.spatial = parse_spatial(require_key(j, "spatial", "scenario"), "scenario.spatial");
  s.source = parse_source(require_key(j, "source", "scenario"), s.state_dim, "scenario.source");

  s.out_csv = s.label + "_solution.csv";
  s.out_report = s.label + "_report.json";
  if (j.contains("outputs")) {
    const Json& outputs = j.at("outputs");
    check_keys(outputs, {"csv", "report"}, "scenario.outputs");
    if (outputs.contains("csv")) s.out_csv = as_string(outputs.at("csv"), "scenario.outputs.csv");
    if (outputs.contains("report")) {
      s.out_report = as_string(outputs.at("report"), "scenario.outputs.report");
    }
  }
  return s;
}

Json Scenario::to_json() const {
  Json j;
  j["format"] = 1;
  j["label"] = label;
  j["grid"] = Json{{"t0", t0}, {"h", h}, {"n", n}};
  if (nus.size() == 1) {
    j["nu"] = nus.front();
  } else {
    j["nu"] = nus;
  }
  j["state_dim"] = state_dim;
  j["material"] = emit_material(material, false);
  j["spatial"] = emit_spatial(spatial);
  j["source"] = emit_source(source);
  j["outputs"] = Json{{"csv", out_csv}, {"report", out_report}};
  return j;
}

TimeGrid Scenario::make_grid() const {
  try {
    return TimeGrid(t0, h, n);
  } catch (const InvalidGridError& e) {
    throw SchemaError(std::string("scenario.grid: ") + e.what());
  }
}

EvolutionaryProblem Scenario::build_problem(double nu,
                                            const std::filesystem::path& base_dir) const {
  const TimeGrid grid = make_grid();
  MaterialLaw law = material.realize(grid);
  law.label = label;
  Matrix a = spatial.realize(state_dim);
  Trajectory f = source.realize(grid, state_dim, base_dir);
  return EvolutionaryProblem(grid, nu, std::move(law), std::move(a), std::move(f), label);
}

// ---- named examples ---------------------------------------------------------

namespace {

std::string scaled_bump_expr(double amplitude) {
  // Smooth start s(t) = t^2 e^{-t}, scaled per component.
  return format_double(amplitude) + "*t*t*exp(-t)";
}

Scenario wave_memory_scenario() {
  const Index points = 6;
  const GradDiv1D gd = make_grad_div_1d(points, "dirichlet", 1.0);

  Scenario s;
  s.label = "wave_memory";
  s.t0 = 0.0;
  s.h = 2.0 / 64.0;
  s.n = 64;
  s.nus = {1.0};
  s.state_dim = gd.n_potential + gd.n_flux;

  MaterialSpec velocity;
  velocity.kind = MaterialLaw::Kind::autonomous;
  velocity.dim = gd.n_potential;
  velocity.min_nu = 0.1;
  velocity.m_kernel.delta = Matrix::Identity(gd.n_potential, gd.n_potential);
  velocity.n_kernel.delta = Matrix::Zero(gd.n_potential, gd.n_potential);

  MaterialSpec strain;
  strain.kind = MaterialLaw::Kind::autonomous;
  strain.dim = gd.n_flux;
  strain.min_nu = 0.1;
  strain.m_kernel.delta = Matrix::Identity(gd.n_flux, gd.n_flux);
  strain.m_kernel.conv = KernelSpec::Conv{0.5, 1.0};
  strain.n_kernel.delta = Matrix::Zero(gd.n_flux, gd.n_flux);

  s.material.kind = MaterialLaw::Kind::block;
  s.material.dim = s.state_dim;
  s.material.min_nu = 0.1;
  s.material.components = {std::move(velocity), std::move(strain)};

  s.spatial.kind = SpatialSpec::Kind::grad_div_1d;
  s.spatial.points = points;
  s.spatial.bc = "dirichlet";
  s.spatial.coefficient = 1.0;

  s.source.kind = SourceSpec::Kind::expression;
  for (double x : gd.potential_nodes) {
    s.source.components.push_back(
        Expr::parse(format_double(std::sin(std::numbers::pi * x)) + "*sin(2*t)*exp(-0.5*t)"));
  }
  for (Index i = 0; i < gd.n_flux; ++i) s.source.components.push_back(Expr::constant(0.0));

  s.out_csv = s.label + "_solution.csv";
  s.out_report = s.label + "_report.json";
  return s;
}

Scenario tdide_scenario() {
  Scenario s;
  s.label = "tdide";
  s.t0 = 0.0;
  s.h = 0.125;
  s.n = 64;
  s.nus = {1.0};
  s.state_dim = 3;

  // Memory block: M(D^{-1}) = 1 + 0.5 conv(e^{-t}) on one component.
  MaterialSpec memory;
  memory.kind = MaterialLaw::Kind::autonomous;
  memory.dim = 1;
  memory.min_nu = 0.25;
  memory.m_kernel.delta = Matrix::Identity(1, 1);
  memory.m_kernel.conv = KernelSpec::Conv{0.5, 1.0};
  memory.n_kernel.delta = Matrix::Zero(1, 1);

  // Time-varying block: M0 = (2 + sin t) I, M1 constant skew.
  MaterialSpec varying;
  varying.kind = MaterialLaw::Kind::nonautonomous;
  varying.dim = 2;
  varying.min_nu = 0.5;
  varying.m0 = {{Expr::parse("2+sin(t)"), Expr::constant(0.0)},
                {Expr::constant(0.0), Expr::parse("2+sin(t)")}};
  varying.m0dot = {{Expr::parse("cos(t)"), Expr::constant(0.0)},
                   {Expr::constant(0.0), Expr::parse("cos(t)")}};
  varying.m1 = {{Expr::constant(0.0), Expr::constant(0.5)},
                {Expr::constant(-0.5), Expr::constant(0.0)}};

  s.material.kind = MaterialLaw::Kind::block;
  s.material.dim = 3;
  s.material.min_nu = 0.5;
  s.material.components = {std::move(memory), std::move(varying)};

  // A = 0.8 * skew + 0.1 * I: maximal monotone, not skew, blocks not aligned
  // with the material split.
  Matrix a(3, 3);
  a << 0.1, 0.8, 0.0,  //
      -0.8, 0.1, 0.8,  //
      0.0, -0.8, 0.1;
  s.spatial.kind = SpatialSpec::Kind::matrix;
  s.spatial.value = a;

  s.source.kind = SourceSpec::Kind::expression;
  s.source.components = {Expr::parse("sin(t)*exp(-0.2*t)"), Expr::parse("cos(t)*exp(-0.2*t)"),
                         Expr::parse("0.5*sin(2*t)*exp(-0.2*t)")};

  s.out_csv = s.label + "_solution.csv";
  s.out_report = s.label + "_report.json";
  return s;
}

}  // namespace

Scenario heat1d_scenario(const HeatParams& params) {
  const GradDiv1D gd = make_grad_div_1d(params.points, "dirichlet", 1.0);

  Scenario s;
  s.label = "heat1d";
  s.t0 = 0.0;
  s.h = params.t_end / static_cast<double>(params.n);
  s.n = params.n;
  s.nus = {params.nu};
  s.state_dim = gd.n_potential + gd.n_flux;

  // First-order form (theta, q): M0 = diag(I, 0), M1 = diag(0, I/k),
  // A = [[0, div], [grad, 0]].
  MaterialSpec material;
  material.kind = MaterialLaw::Kind::nonautonomous;
  material.dim = s.state_dim;
  material.min_nu = 0.0;
  const Index d = s.state_dim;
  material.m0.resize(static_cast<std::size_t>(d));
  material.m0dot.resize(static_cast<std::size_t>(d));
  material.m1.resize(static_cast<std::size_t>(d));
  for (Index r = 0; r < d; ++r) {
    for (Index c = 0; c < d; ++c) {
      const bool theta = r < gd.n_potential;
      material.m0[static_cast<std::size_t>(r)].push_back(
          Expr::constant(r == c && theta ? 1.0 : 0.0));
      material.m0dot[static_cast<std::size_t>(r)].push_back(Expr::constant(0.0));
      material.m1[static_cast<std::size_t>(r)].push_back(
          Expr::constant(r == c && !theta ? 1.0 / params.conductivity : 0.0));
    }
  }
  s.material = std::move(material);

  s.spatial.kind = SpatialSpec::Kind::grad_div_1d;
  s.spatial.points = params.points;
  s.spatial.bc = "dirichlet";
  s.spatial.coefficient = 1.0;

  s.source.kind = SourceSpec::Kind::expression;
  for (double x : gd.potential_nodes) {
    s.source.components.push_back(Expr::parse(scaled_bump_expr(std::sin(std::numbers::pi * x))));
  }
  for (Index i = 0; i < gd.n_flux; ++i) s.source.components.push_back(Expr::constant(0.0));

  s.out_csv = s.label + "_solution.csv";
  s.out_report = s.label + "_report.json";
  return s;
}

std::vector<std::string> named_example_list() { return {"heat1d", "wave_memory", "tdide"}; }

Scenario named_example(const std::string& name) {
  if (name == "heat1d") return heat1d_scenario(HeatParams{});
  if (name == "wave_memory") return wave_memory_scenario();
  if (name == "tdide") return tdide_scenario();
  throw SchemaError("unknown named example '" + name + "'");
}

Scenario load_scenario(const std::string& path_or_name) {
  for (const std::string& name : named_example_list()) {
    if (path_or_name == name) return named_example(name);
  }
  std::ifstream in(path_or_name);
  if (!in) throw SchemaError("cannot open scenario file '" + path_or_name + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("scenario file '" + path_or_name + "': " + e.what());
  }
  return Scenario::from_json(j);
}

// ---- artifacts ---------------------------------------------------------------

namespace {

void atomic_write_text(const std::filesystem::path& path, const std::string& text) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write to " + tmp.string());
    out << text;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& u) {
  std::string text;
  text.reserve(static_cast<std::size_t>(u.n()) * static_cast<std::size_t>(u.dim()) * 24);
  text += "k,t";
  for (Index i = 0; i < u.dim(); ++i) {
    text += ",re_u" + std::to_string(i + 1) + ",im_u" + std::to_string(i + 1);
  }
  text += "\n";
  char buf[40];
  for (Index k = 0; k < u.n(); ++k) {
    text += std::to_string(k);
    std::snprintf(buf, sizeof(buf), ",%.17g", u.grid().time(k));
    text += buf;
    for (Index i = 0; i < u.dim(); ++i) {
      std::snprintf(buf, sizeof(buf), ",%.17g", u.values()(i, k).real());
      text += buf;
      std::snprintf(buf, sizeof(buf), ",%.17g", u.values()(i, k).imag());
      text += buf;
    }
    text += "\n";
  }
  atomic_write_text(path, text);
}

Trajectory read_trajectory_csv(const std::filesystem::path& path, const TimeGrid& grid,
                               Index dim) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open csv file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("csv file is empty");
  std::string expected_header = "k,t";
  for (Index i = 0; i < dim; ++i) {
    expected_header += ",re_u" + std::to_string(i + 1) + ",im_u" + std::to_string(i + 1);
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected_header) {
    throw SchemaError("csv header mismatch: expected '" + expected_header + "'");
  }

  Matrix v(dim, grid.n());
  for (Index k = 0; k < grid.n(); ++k) {
    if (!std::getline(in, line)) {
      throw SchemaError("csv file ends early at row " + std::to_string(k));
    }
    std::stringstream row(line);
    std::string field;
    std::vector<double> fields;
    while (std::getline(row, field, ',')) {
      try {
        fields.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw SchemaError("csv row " + std::to_string(k) + ": bad number '" + field + "'");
      }
    }
    if (static_cast<Index>(fields.size()) != 2 + 2 * dim) {
      throw SchemaError("csv row " + std::to_string(k) + ": expected " +
                        std::to_string(2 + 2 * dim) + " fields");
    }
    if (static_cast<Index>(std::llround(fields[0])) != k) {
      throw SchemaError("csv row " + std::to_string(k) + ": index column mismatch");
    }
    for (Index i = 0; i < dim; ++i) {
      v(i, k) = Complex(fields[static_cast<std::size_t>(2 + 2 * i)],
                        fields[static_cast<std::size_t>(3 + 2 * i)]);
    }
  }
  return Trajectory(grid, std::move(v));
}

void write_json_atomic(const std::filesystem::path& path, const Json& j) {
  atomic_write_text(path, j.dump(2) + "\n");
}

Json certificate_to_json(const Certificate& cert) {
  Json j;
  j["c"] = cert.c;
  j["c_adjoint"] = cert.c_adjoint;
  j["norm_bound"] = std::isfinite(cert.norm_bound) ? Json(cert.norm_bound) : Json(nullptr);
  j["nu"] = cert.nu;
  Json samples = Json::array();
  for (const auto& [a, ca] : cert.cutoff_samples) samples.push_back(Json::array({a, ca}));
  j["cutoff_samples"] = std::move(samples);
  j["maria_pointwise_c"] = cert.maria_pointwise_c ? Json(*cert.maria_pointwise_c) : Json(nullptr);
  return j;
}

Json solve_report_to_json(const SolveReport& report) {
  Json j;
  j["format"] = 1;
  j["label"] = report.label;
  j["residual_rel"] = report.residual_rel;
  j["certificate"] = certificate_to_json(report.certificate);
  j["norm_ratio"] = report.norm_ratio;
  j["causality_ok"] = report.causality_ok;
  j["wallclock_seconds"] = report.wallclock_seconds;
  j["max_step_condition"] = report.max_step_condition;
  return j;
}

Json convergence_report_to_json(const std::string& study, const ConvergenceReport& report) {
  Json j;
  j["format"] = 1;
  j["study"] = study;
  j["params"] = report.params;
  j["errors"] = report.errors;
  j["observed_order"] =
      std::isfinite(report.observed_order) ? Json(report.observed_order) : Json(nullptr);
  j["threshold"] = report.threshold;
  j["pass"] = report.pass;
  return j;
}

Json check_result_to_json(const CheckResult& result) {
  Json j;
  j["name"] = result.name;
  j["seed"] = result.seed;
  j["measured"] = result.measured;
  j["threshold"] = result.threshold;
  j["pass"] = result.pass;
  return j;
}

}  // namespace evolv
