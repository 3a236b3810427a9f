#include "sparsedae/io.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "sparsedae/errors.hpp"
#include "sparsedae/expr_parser.hpp"

namespace sparsedae {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

double need_double(std::string_view s, std::size_t line, std::string_view what) {
  auto v = to_double(s);
  if (!v) throw ParseError("invalid " + std::string(what) + " '" + std::string(trim(s)) + "'", line);
  return *v;
}

std::size_t need_count(std::string_view s, std::size_t line) {
  s = trim(s);
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError("invalid count '" + std::string(s) + "'", line);
  return v;
}

Status parse_status(std::string_view s, std::size_t line) {
  for (Status st : {Status::Success, Status::TooManySteps, Status::StepUnderflow})
    if (to_string(st) == s) return st;
  throw ParseError("unknown status '" + std::string(s) + "'", line);
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

// Position of the '=' that separates two sides, skipping <=, >= and ==.
std::size_t find_assignment(std::string_view s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '=') continue;
    bool part_of_compare = (i > 0 && (s[i - 1] == '<' || s[i - 1] == '>' || s[i - 1] == '=')) ||
                           (i + 1 < s.size() && s[i + 1] == '=');
    if (!part_of_compare) return i;
  }
  return std::string_view::npos;
}

}  // namespace

// ---------------------------------------------------------------------------
// trajectory CSV

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const ProbeValues& probes) {
  out << 't';
  for (const auto& n : traj.names) out << ',' << n;
  out << '\n';
  for (std::size_t k = 0; k < traj.t.size(); ++k) {
    out << format_double(traj.t[k]);
    for (double v : traj.states[k]) out << ',' << format_double(v);
    out << '\n';
  }
  out << "# accepted=" << traj.accepted << ", rejected=" << traj.rejected << ", jac_updates=" << traj.jacobian_updates
      << ", lu=" << traj.lu_count << ", status=" << to_string(traj.status) << '\n';
  for (const auto& [name, value] : probes) out << "# " << name << '=' << format_double(value) << '\n';
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj, const ProbeValues& probes) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  write_trajectory_csv(out, traj, probes);
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

CsvTrajectory read_trajectory_csv(std::istream& in) {
  CsvTrajectory result;
  Trajectory& traj = result.trajectory;
  std::string raw;
  std::size_t line = 0;
  bool have_header = false;
  bool have_summary = false;

  while (std::getline(in, raw)) {
    ++line;
    std::string_view s = trim(raw);
    if (s.empty()) continue;

    if (s.front() == '#') {
      s = trim(s.substr(1));
      if (!have_summary && s.starts_with("accepted=")) {
        for (auto field : split(s, ',')) {
          field = trim(field);
          auto eq = field.find('=');
          if (eq == std::string_view::npos) throw ParseError("malformed summary field", line);
          auto key = field.substr(0, eq);
          auto value = field.substr(eq + 1);
          if (key == "accepted") traj.accepted = need_count(value, line);
          else if (key == "rejected") traj.rejected = need_count(value, line);
          else if (key == "jac_updates") traj.jacobian_updates = need_count(value, line);
          else if (key == "lu") traj.lu_count = need_count(value, line);
          else if (key == "status") traj.status = parse_status(value, line);
          else throw ParseError("unknown summary field '" + std::string(key) + "'", line);
        }
        have_summary = true;
      } else {
        auto eq = s.find('=');
        if (eq == std::string_view::npos) continue;
        result.probes.emplace_back(std::string(trim(s.substr(0, eq))), need_double(s.substr(eq + 1), line, "probe value"));
      }
      continue;
    }

    auto cells = split(s, ',');
    if (!have_header) {
      if (trim(cells[0]) != "t") throw ParseError("header must start with 't'", line);
      for (std::size_t i = 1; i < cells.size(); ++i) traj.names.emplace_back(trim(cells[i]));
      have_header = true;
      continue;
    }
    if (cells.size() != traj.names.size() + 1)
      throw ParseError("expected " + std::to_string(traj.names.size() + 1) + " columns, got " +
                           std::to_string(cells.size()),
                       line);
    traj.t.push_back(need_double(cells[0], line, "number"));
    ValueVector state(traj.names.size());
    for (std::size_t i = 0; i < state.size(); ++i) state[i] = need_double(cells[i + 1], line, "number");
    traj.states.push_back(std::move(state));
  }
  if (!have_header) throw ParseError("missing header");
  return result;
}

CsvTrajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return read_trajectory_csv(in);
}

// ---------------------------------------------------------------------------
// problem files

namespace {

struct SourceLine {
  std::size_t line;
  std::string lhs;
  std::string rhs;
};

}  // namespace

Problem parse_problem(std::string_view text, std::string id) {
  enum class Section { None, Params, Odes, Algebraic, Init };
  std::vector<SourceLine> params, odes, algebraic, init;
  Section section = Section::None;

  std::size_t line = 0;
  for (auto raw : split(text, '\n')) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    std::string_view s = trim(raw);
    if (s.empty()) continue;

    if (s.front() == '[') {
      if (s == "[params]") section = Section::Params;
      else if (s == "[odes]") section = Section::Odes;
      else if (s == "[algebraic]") section = Section::Algebraic;
      else if (s == "[init]") section = Section::Init;
      else throw ParseError("unknown section " + std::string(s), line);
      continue;
    }
    if (section == Section::None) throw ParseError("content before the first section", line);

    auto eq = find_assignment(s);
    if (eq == std::string_view::npos) throw ParseError("expected '='", line);
    SourceLine entry{line, std::string(trim(s.substr(0, eq))), std::string(trim(s.substr(eq + 1)))};
    if (entry.lhs.empty() || entry.rhs.empty()) throw ParseError("empty side of '='", line);

    switch (section) {
      case Section::Params: params.push_back(std::move(entry)); break;
      case Section::Odes: odes.push_back(std::move(entry)); break;
      case Section::Algebraic: algebraic.push_back(std::move(entry)); break;
      case Section::Init: init.push_back(std::move(entry)); break;
      case Section::None: break;
    }
  }

  ParameterMap param_values;
  for (const auto& p : params) {
    if (!is_identifier(p.lhs)) throw ParseError("invalid parameter name '" + p.lhs + "'", p.line);
    if (!param_values.emplace(p.lhs, need_double(p.rhs, p.line, "parameter value")).second)
      throw ParseError("duplicate parameter '" + p.lhs + "'", p.line);
  }

  std::vector<std::string> names;
  std::map<std::string, std::size_t, std::less<>> index;
  auto declare = [&](const std::string& name, std::size_t at) {
    if (!is_identifier(name)) throw ParseError("invalid variable name '" + name + "'", at);
    if (param_values.contains(name)) throw ParseError("'" + name + "' is both a parameter and a variable", at);
    if (!index.emplace(name, names.size()).second) throw ParseError("duplicate variable '" + name + "'", at);
    names.push_back(name);
  };

  for (auto& o : odes) {
    if (o.lhs.size() < 2 || o.lhs.back() != '\'') throw ParseError("ODE line must read name' = expr", o.line);
    o.lhs = std::string(trim(std::string_view(o.lhs).substr(0, o.lhs.size() - 1)));
    declare(o.lhs, o.line);
  }
  const std::size_t n_ode = names.size();

  std::map<std::string, double, std::less<>> init_values;
  for (const auto& i : init) {
    if (!init_values.emplace(i.lhs, need_double(i.rhs, i.line, "initial value")).second)
      throw ParseError("duplicate initial value for '" + i.lhs + "'", i.line);
    if (!index.contains(i.lhs)) declare(i.lhs, i.line);
  }
  for (std::size_t j = 0; j < n_ode; ++j)
    if (!init_values.contains(names[j])) throw InvalidSystem("no initial value for '" + names[j] + "'");
  if (names.size() - n_ode != algebraic.size())
    throw InvalidSystem(std::to_string(algebraic.size()) + " algebraic equations for " +
                        std::to_string(names.size() - n_ode) + " algebraic variables");

  UnknownResolver resolver = [&](std::string_view name) -> std::optional<std::size_t> {
    auto it = index.find(name);
    if (it == index.end()) return std::nullopt;
    return it->second;
  };
  auto parse_checked = [&](const std::string& source, std::size_t at) {
    Expr e = parse_expression(source, resolver, at);
    for (const auto& p : free_parameters(e))
      if (!param_values.contains(p)) throw ParseError("undeclared symbol '" + p + "'", at);
    return e;
  };

  std::vector<Expr> rhs;
  for (const auto& o : odes) rhs.push_back(parse_checked(o.rhs, o.line));
  std::vector<Expr> alg;
  for (const auto& a : algebraic) {
    Expr lhs = parse_checked(a.lhs, a.line);
    Expr right = parse_checked(a.rhs, a.line);
    alg.push_back(right.is_zero() ? lhs : lhs - right);
  }

  ValueVector initial(names.size());
  for (std::size_t j = 0; j < names.size(); ++j) initial[j] = init_values.at(names[j]);

  return Problem{std::move(id), DaeSystem(std::move(rhs), std::move(alg), std::move(names), std::move(initial),
                                          std::move(param_values)),
                 std::nullopt, {}, {}};
}

Problem load_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_problem(buffer.str(), path.stem().string());
}

}  // namespace sparsedae
