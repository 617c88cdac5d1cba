#pragma once
// Text configuration for a system, its boundary conditions and numeric options.
//
//   family = sturm_liouville      # dirac | sturm_liouville | block | dae
//   n = 1
//   bc = separated                # separated | general
//   window = 0, 50
//   [P]
//   1
//   [alpha]
//   1, 0
//
// Matrix sections hold one comma-separated row of expressions per line. [options] holds
// key = value pairs.

#include "maslov/errors.hpp"
#include "maslov/expression.hpp"
#include "maslov/hamiltonian.hpp"
#include "maslov/oracle.hpp"
#include "maslov/renormalized_count.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace maslov {

struct ExpressionMatrix {
  std::vector<std::vector<Expression>> rows;
  int line = 0;

  Eigen::Index row_count() const noexcept { return static_cast<Eigen::Index>(rows.size()); }
  Eigen::Index col_count() const noexcept { return rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()); }
  bool depends_on_x() const {
    for (const auto& r : rows)
      for (const auto& e : r)
        if (e.depends_on_x()) return true;
    return false;
  }
  Matrix eval(double x) const {
    Matrix m(row_count(), col_count());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j](x);
    return m;
  }
  CoefficientFn function() const {
    auto self = *this;
    return [self](double x) { return self.eval(x); };
  }
  friend bool operator==(const ExpressionMatrix& a, const ExpressionMatrix& b) { return a.rows == b.rows; }
};

struct SystemConfig {
  std::string family;
  int n = 0;
  int m = 0;
  int r = 0;
  std::string bc = "separated";
  std::optional<std::pair<Expression, Expression>> window;
  std::map<std::string, ExpressionMatrix> matrices;
  /// [options] entries in file order.
  std::vector<std::pair<std::string, std::string>> options;

  const ExpressionMatrix& matrix(const std::string& name) const { return matrices.at(name); }
  std::optional<std::string> option(const std::string& key) const {
    for (const auto& [k, v] : options)
      if (k == key) return v;
    return std::nullopt;
  }
  /// Half-dimension of the first-order system.
  int system_n() const { return family == "dae" ? m : n; }

  friend bool operator==(const SystemConfig& a, const SystemConfig& b) {
    return a.family == b.family && a.n == b.n && a.m == b.m && a.r == b.r && a.bc == b.bc && a.window == b.window &&
           a.matrices == b.matrices && a.options == b.options;
  }
};

namespace detail {

inline const std::vector<std::string>& option_keys() {
  static const std::vector<std::string> keys{"grid_points", "rtol",       "atol",  "angle_tol",
                                             "fd_h",        "resolution", "lambda_samples", "force",
                                             "essential_spectrum"};
  return keys;
}

inline const std::vector<std::string>& matrix_sections() {
  static const std::vector<std::string> names{"P",     "Q",    "R",     "V",     "P11", "V11",
                                              "V12",   "V22",  "alpha", "beta",  "theta"};
  return names;
}

inline std::vector<std::string> family_matrices(const std::string& family) {
  if (family == "dirac") return {"Q", "V"};
  if (family == "sturm_liouville") return {"P", "V", "Q"};
  if (family == "block") return {"R", "V"};
  if (family == "dae") return {"P11", "V11", "V12", "V22"};
  return {};
}

inline std::string_view trim(std::string_view s, std::size_t& offset) {
  offset = 0;
  while (offset < s.size() && std::isspace(static_cast<unsigned char>(s[offset]))) ++offset;
  std::size_t end = s.size();
  while (end > offset && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(offset, end - offset);
}

/// Splits at commas outside parentheses; each cell keeps its 1-based column.
inline std::vector<std::pair<std::string, int>> split_cells(std::string_view s, int line, int column) {
  std::vector<std::pair<std::string, int>> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i < s.size() && s[i] == '(') ++depth;
    if (i < s.size() && s[i] == ')') --depth;
    if (i == s.size() || (s[i] == ',' && depth == 0)) {
      std::size_t off;
      const std::string_view cell = trim(s.substr(start, i - start), off);
      if (cell.empty()) throw ConfigError("empty entry", line, column + static_cast<int>(start));
      out.emplace_back(std::string(cell), column + static_cast<int>(start + off));
      start = i + 1;
    }
  }
  return out;
}

inline int parse_int(const std::string& v, const std::string& key, int line, int column) {
  std::size_t used = 0;
  int out = 0;
  try {
    out = std::stoi(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || out < 1) throw ConfigError(key + " must be a positive integer", line, column);
  return out;
}

inline void check_shape(const SystemConfig& c, const std::string& name, Eigen::Index rows, Eigen::Index cols) {
  const auto it = c.matrices.find(name);
  if (it == c.matrices.end()) throw ConfigError("missing section [" + name + "]", 1, 1);
  if (it->second.row_count() != rows || it->second.col_count() != cols)
    throw ConfigError("[" + name + "] must be " + std::to_string(rows) + " x " + std::to_string(cols) + ", found " +
                          std::to_string(it->second.row_count()) + " x " + std::to_string(it->second.col_count()),
                      it->second.line, 1);
}

/// Line of the boundary section named at the start of a validation message.
inline int bc_line(const SystemConfig& c, const std::string& message) {
  for (const char* k : {"alpha", "beta", "theta"})
    if (message.rfind(k, 0) == 0 && c.matrices.count(k)) return c.matrix(k).line;
  return 1;
}

inline void validate_config(const SystemConfig& c, const std::map<std::string, int>& key_lines) {
  auto line_of = [&](const std::string& k) {
    const auto it = key_lines.find(k);
    return it == key_lines.end() ? 1 : it->second;
  };
  if (c.family.empty()) throw ConfigError("missing key 'family'", 1, 1);
  if (family_matrices(c.family).empty())
    throw ConfigError("unknown family '" + c.family + "'", line_of("family"), 1);
  if (c.n < 1) throw ConfigError("missing key 'n'", 1, 1);
  if (c.family == "dae" && (c.m < 1 || c.m >= c.n)) throw ConfigError("dae needs 0 < m < n", line_of("m"), 1);
  if (c.family == "block" && (c.r < 1 || c.r > 2 * c.n)) throw ConfigError("block needs 1 <= r <= 2n", line_of("r"), 1);
  if (c.bc != "separated" && c.bc != "general")
    throw ConfigError("bc must be 'separated' or 'general'", line_of("bc"), 1);
  const Eigen::Index n = c.n, m = c.m;
  if (c.family == "dirac") {
    check_shape(c, "Q", 2 * n, 2 * n);
    check_shape(c, "V", 2 * n, 2 * n);
  } else if (c.family == "sturm_liouville") {
    for (const char* k : {"P", "V", "Q"}) check_shape(c, k, n, n);
  } else if (c.family == "block") {
    check_shape(c, "R", c.r, c.r);
    check_shape(c, "V", 2 * n, 2 * n);
  } else {
    check_shape(c, "P11", m, m);
    check_shape(c, "V11", m, m);
    check_shape(c, "V12", m, n - m);
    check_shape(c, "V22", n - m, n - m);
  }
  const auto allowed = family_matrices(c.family);
  for (const auto& [name, mat] : c.matrices) {
    const bool bc_section = name == "alpha" || name == "beta" || name == "theta";
    if (!bc_section && std::find(allowed.begin(), allowed.end(), name) == allowed.end())
      throw ConfigError("section [" + name + "] does not belong to family " + c.family, mat.line, 1);
    if (bc_section && mat.depends_on_x())
      throw ConfigError("boundary data must not depend on x", mat.line, 1);
  }
  const Eigen::Index sn = c.system_n();
  try {
    if (c.bc == "separated") {
      if (c.matrices.count("theta")) throw ConfigError("[theta] needs bc = general", c.matrix("theta").line, 1);
      check_shape(c, "alpha", sn, 2 * sn);
      check_shape(c, "beta", sn, 2 * sn);
      validate_bc(SeparatedBC{c.matrix("alpha").eval(0.0), c.matrix("beta").eval(0.0)}, sn);
    } else {
      for (const char* k : {"alpha", "beta"})
        if (c.matrices.count(k)) throw ConfigError(std::string("[") + k + "] needs bc = separated", c.matrix(k).line, 1);
      check_shape(c, "theta", 2 * sn, 4 * sn);
      validate_bc(GeneralBC{c.matrix("theta").eval(0.0)}, sn);
    }
  } catch (const InvalidBoundaryConditions& e) {
    throw ConfigError(e.what(), bc_line(c, e.what()), 1);
  } catch (const DimensionMismatch& e) {
    throw ConfigError(e.what(), bc_line(c, e.what()), 1);
  }
  for (const auto& [k, v] : c.options) {
    const int line = line_of("option:" + k);
    if (std::find(option_keys().begin(), option_keys().end(), k) == option_keys().end())
      throw ConfigError("unknown option '" + k + "'", line, 1);
    if (k == "force") {
      if (v != "true" && v != "false") throw ConfigError("force must be 'true' or 'false'", line, 1);
    } else if (k == "essential_spectrum") {
      if (v != "reject" && v != "allow") throw ConfigError("essential_spectrum must be 'reject' or 'allow'", line, 1);
    } else {
      char* end = nullptr;
      const double d = std::strtod(v.c_str(), &end);
      if (end != v.c_str() + v.size() || !(d > 0)) throw ConfigError("option '" + k + "' must be a positive number", line, 1);
    }
  }
}

}  // namespace detail

inline SystemConfig parse_config(std::string_view text) {
  SystemConfig c;
  std::map<std::string, int> key_lines;
  std::string section;
  ExpressionMatrix* current = nullptr;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view raw = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    std::size_t off;
    const std::string_view line = detail::trim(raw, off);
    const int col = static_cast<int>(off) + 1;
    if (line.empty()) {
      if (eol == text.size()) break;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("expected ']'", line_no, col + static_cast<int>(line.size()));
      section = std::string(line.substr(1, line.size() - 2));
      current = nullptr;
      if (section == "options") {
        if (key_lines.count("[options]")) throw ConfigError("duplicate section [options]", line_no, col);
        key_lines["[options]"] = line_no;
      } else {
        const auto& names = detail::matrix_sections();
        if (std::find(names.begin(), names.end(), section) == names.end())
          throw ConfigError("unknown section [" + section + "]", line_no, col);
        if (c.matrices.count(section)) throw ConfigError("duplicate section [" + section + "]", line_no, col);
        current = &c.matrices[section];
        current->line = line_no;
      }
    } else if (const auto eq = line.find('='); eq != std::string_view::npos) {
      std::size_t koff, voff;
      const std::string key(detail::trim(line.substr(0, eq), koff));
      const std::string_view value = detail::trim(line.substr(eq + 1), voff);
      const int vcol = col + static_cast<int>(eq + 1 + voff);
      if (key.empty()) throw ConfigError("missing key before '='", line_no, col);
      if (value.empty()) throw ConfigError("missing value for '" + key + "'", line_no, vcol);
      if (current) throw ConfigError("'" + key + "' inside matrix section [" + section + "]", line_no, col);
      if (section == "options") {
        if (key_lines.count("option:" + key)) throw ConfigError("duplicate option '" + key + "'", line_no, col);
        key_lines["option:" + key] = line_no;
        c.options.emplace_back(key, std::string(value));
        continue;
      }
      if (key_lines.count(key)) throw ConfigError("duplicate key '" + key + "'", line_no, col);
      key_lines[key] = line_no;
      const std::string v(value);
      if (key == "family")
        c.family = v;
      else if (key == "n")
        c.n = detail::parse_int(v, key, line_no, vcol);
      else if (key == "m")
        c.m = detail::parse_int(v, key, line_no, vcol);
      else if (key == "r")
        c.r = detail::parse_int(v, key, line_no, vcol);
      else if (key == "bc")
        c.bc = v;
      else if (key == "window") {
        const auto cells = detail::split_cells(value, line_no, vcol);
        if (cells.size() != 2) throw ConfigError("window needs two values", line_no, vcol);
        const Expression a = Expression::parse(cells[0].first, line_no, cells[0].second);
        const Expression b = Expression::parse(cells[1].first, line_no, cells[1].second);
        if (a.depends_on_x() || b.depends_on_x()) throw ConfigError("window must not depend on x", line_no, vcol);
        c.window = std::make_pair(a, b);
      } else {
        throw ConfigError("unknown key '" + key + "'", line_no, col);
      }
    } else {
      if (!current) throw ConfigError("matrix row outside a matrix section", line_no, col);
      std::vector<Expression> row;
      for (const auto& [cell, ccol] : detail::split_cells(line, line_no, col))
        row.push_back(Expression::parse(cell, line_no, ccol));
      if (!current->rows.empty() && row.size() != current->rows.front().size())
        throw ConfigError("row has " + std::to_string(row.size()) + " entries, expected " +
                              std::to_string(current->rows.front().size()),
                          line_no, col);
      current->rows.push_back(std::move(row));
    }
    if (eol == text.size()) break;
  }
  detail::validate_config(c, key_lines);
  return c;
}

inline std::string serialize(const SystemConfig& c) {
  std::ostringstream s;
  s << "family = " << c.family << "\n";
  s << "n = " << c.n << "\n";
  if (c.family == "dae") s << "m = " << c.m << "\n";
  if (c.family == "block") s << "r = " << c.r << "\n";
  s << "bc = " << c.bc << "\n";
  if (c.window) s << "window = " << c.window->first.serialize() << ", " << c.window->second.serialize() << "\n";
  std::vector<std::string> order = detail::family_matrices(c.family);
  for (const char* k : {"alpha", "beta", "theta"}) order.emplace_back(k);
  for (const auto& name : order) {
    const auto it = c.matrices.find(name);
    if (it == c.matrices.end()) continue;
    s << "\n[" << name << "]\n";
    for (const auto& row : it->second.rows) {
      for (std::size_t j = 0; j < row.size(); ++j) s << (j ? ", " : "") << row[j].serialize();
      s << "\n";
    }
  }
  if (!c.options.empty()) {
    s << "\n[options]\n";
    for (const auto& [k, v] : c.options) s << k << " = " << v << "\n";
  }
  return s.str();
}

/// Everything a command needs, built from a configuration.
struct Problem {
  HamiltonianSystem system;
  BoundaryConditions bc;
  double lambda1;
  double lambda2;
  CountOptions count;
  FdOptions fd;
  int resolution = 64;
  std::size_t audit_lambda_samples = 129;
};

namespace detail {

inline double option_double(const SystemConfig& c, const std::string& key, double fallback) {
  const auto v = c.option(key);
  return v ? std::strtod(v->c_str(), nullptr) : fallback;
}

}  // namespace detail

inline Problem build_problem(const SystemConfig& c, std::optional<std::pair<double, double>> window = std::nullopt,
                             std::optional<EssentialSpectrumPolicy> policy = std::nullopt) {
  if (!window) {
    if (!c.window) throw ConfigError("no window given", 1, 1);
    window = std::make_pair(c.window->first(0.0), c.window->second(0.0));
  }
  if (!(window->first < window->second)) throw Error("window needs lambda1 < lambda2");
  EssentialSpectrumPolicy pol = EssentialSpectrumPolicy::reject;
  if (c.option("essential_spectrum") == "allow") pol = EssentialSpectrumPolicy::allow;
  if (policy) pol = *policy;

  auto make = [&]() -> HamiltonianSystem {
    if (c.family == "dirac") return make_dirac(c.matrix("Q").function(), c.matrix("V").function());
    if (c.family == "sturm_liouville")
      return make_sturm_liouville(c.matrix("P").function(), c.matrix("V").function(), c.matrix("Q").function());
    if (c.family == "block") return make_block(c.matrix("R").function(), c.matrix("V").function(), c.r);
    DAEReduction red;
    red.m = c.m;
    red.n = c.n;
    red.P11 = c.matrix("P11").function();
    red.V11 = c.matrix("V11").function();
    red.V12 = c.matrix("V12").function();
    red.V22 = c.matrix("V22").function();
    return make_dae(red, *window, pol);
  };
  BoundaryConditions bc;
  if (c.bc == "separated")
    bc = SeparatedBC{c.matrix("alpha").eval(0.0), c.matrix("beta").eval(0.0)};
  else
    bc = GeneralBC{c.matrix("theta").eval(0.0)};

  Problem p{make(), bc, window->first, window->second, {}, {}};
  p.count.propagation.grid_points =
      static_cast<std::size_t>(detail::option_double(c, "grid_points", double(p.count.propagation.grid_points)));
  p.count.propagation.ode.rtol = detail::option_double(c, "rtol", p.count.propagation.ode.rtol);
  p.count.propagation.ode.atol = detail::option_double(c, "atol", p.count.propagation.ode.atol);
  p.count.tracking.angle_tol = detail::option_double(c, "angle_tol", p.count.tracking.angle_tol);
  p.count.assumptions.propagation = p.count.propagation;
  p.fd.h = detail::option_double(c, "fd_h", p.fd.h);
  p.resolution = static_cast<int>(detail::option_double(c, "resolution", p.resolution));
  p.audit_lambda_samples =
      static_cast<std::size_t>(detail::option_double(c, "lambda_samples", double(p.audit_lambda_samples)));
  p.count.force = c.option("force") == "true";
  if (p.count.propagation.grid_points < 2) throw ConfigError("grid_points must be at least 2", 1, 1);
  return p;
}

}  // namespace maslov
