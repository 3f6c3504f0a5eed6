// Copyright 2026 The nhmpc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace nhmpc {
namespace {

// ---------------------------------------------------------------------------
// Number formatting: shortest decimal that round-trips to the same double.

std::string format_number(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, end);
}

std::string format_array(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_number(v[i]);
  }
  out += "]";
  return out;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += "\"";
  return out;
}

// ---------------------------------------------------------------------------
// Tokenized value parsing.

struct Cursor {
  const std::string& text;
  std::size_t pos = 0;
  int line;  // for diagnostics

  void skip_space() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  }
  bool done() {
    skip_space();
    return pos >= text.size();
  }
  char peek() {
    skip_space();
    return pos < text.size() ? text[pos] : '\0';
  }
};

[[noreturn]] void fail(int line, const std::string& message) {
  throw ParseError(line, message);
}

double parse_number(Cursor& c) {
  c.skip_space();
  const char* begin = c.text.data() + c.pos;
  const char* end = c.text.data() + c.text.size();
  double value = 0.0;
  auto [next, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || next == begin)
    fail(c.line, "expected a number");
  c.pos += static_cast<std::size_t>(next - begin);
  return value;
}

std::string parse_string(Cursor& c) {
  if (c.peek() != '"') fail(c.line, "expected a quoted string");
  ++c.pos;
  std::string out;
  while (c.pos < c.text.size()) {
    char ch = c.text[c.pos++];
    if (ch == '\\') {
      if (c.pos >= c.text.size()) fail(c.line, "dangling escape in string");
      char esc = c.text[c.pos++];
      if (esc != '"' && esc != '\\')
        fail(c.line, "unsupported escape in string");
      out += esc;
    } else if (ch == '"') {
      return out;
    } else {
      out += ch;
    }
  }
  fail(c.line, "unterminated string");
}

bool parse_bool(Cursor& c) {
  c.skip_space();
  if (c.text.compare(c.pos, 4, "true") == 0) {
    c.pos += 4;
    return true;
  }
  if (c.text.compare(c.pos, 5, "false") == 0) {
    c.pos += 5;
    return false;
  }
  fail(c.line, "expected true or false");
}

std::vector<double> parse_array(Cursor& c) {
  if (c.peek() != '[') fail(c.line, "expected an array");
  ++c.pos;
  std::vector<double> out;
  if (c.peek() == ']') {
    ++c.pos;
    return out;
  }
  while (true) {
    out.push_back(parse_number(c));
    char ch = c.peek();
    if (ch == ',') {
      ++c.pos;
      continue;
    }
    if (ch == ']') {
      ++c.pos;
      return out;
    }
    fail(c.line, "expected ',' or ']' in array");
  }
}

// Strips an end-of-line comment, respecting string quoting.
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
    } else if (c == '"') {
      in_string = true;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int checked_int(double v, int line, const char* what) {
  const long long n = std::llround(v);
  if (std::abs(v - static_cast<double>(n)) > 1e-12 || n < -2147483648LL ||
      n > 2147483647LL)
    fail(line, std::string(what) + " must be an integer");
  return static_cast<int>(n);
}

std::uint64_t checked_u64(double v, int line, const char* what) {
  if (v < 0 || std::abs(v - std::llround(v)) > 1e-12 || v > 9.007199254740992e15)
    fail(line, std::string(what) + " must be a nonnegative integer");
  return static_cast<std::uint64_t>(std::llround(v));
}

const std::set<std::string> kSections = {
    "vehicle", "setpoint", "initial_state", "cost",
    "horizon", "solver",   "output"};

const std::set<std::string> kVehicleParams = {"wheelbase", "hitch1", "hitch2"};

}  // namespace

bool operator==(const SolverSettings& a, const SolverSettings& b) {
  return a.max_iter == b.max_iter && a.tol == b.tol &&
         a.restarts == b.restarts && a.seed == b.seed &&
         a.substeps == b.substeps && a.warm_start == b.warm_start;
}

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
  return a.vehicle == b.vehicle && a.params == b.params &&
         a.u_min == b.u_min && a.u_max == b.u_max &&
         a.setpoint == b.setpoint && a.x0 == b.x0 &&
         a.cost_kind == b.cost_kind && a.q == b.q && a.r == b.r &&
         a.cancel_gcd == b.cancel_gcd && a.scale == b.scale && a.dt == b.dt &&
         a.H == b.H && a.duration == b.duration && a.solver == b.solver &&
         a.output == b.output;
}

ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig cfg;
  std::string section;
  std::set<std::string> seen;  // "section.key" duplicates

  std::istringstream stream(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(stream, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!kSections.count(section))
        fail(line_no, "unknown section '" + section + "'");
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      fail(line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty() ||
        key.find_first_not_of(
            "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_") !=
            std::string::npos)
      fail(line_no, "invalid key '" + key + "'");
    if (section.empty()) fail(line_no, "key outside of any section");
    if (!seen.insert(section + "." + key).second)
      fail(line_no, "duplicate key '" + key + "' in [" + section + "]");

    const std::string value_text = trim(line.substr(eq + 1));
    Cursor cur{value_text, 0, line_no};
    auto expect_end = [&]() {
      if (!cur.done()) fail(line_no, "trailing characters after value");
    };

    if (section == "vehicle") {
      if (key == "name") {
        cfg.vehicle = parse_string(cur);
      } else if (kVehicleParams.count(key)) {
        cfg.params[key] = parse_number(cur);
      } else if (key == "u_min") {
        cfg.u_min = parse_array(cur);
      } else if (key == "u_max") {
        cfg.u_max = parse_array(cur);
      } else {
        fail(line_no, "unknown key '" + key + "' in [vehicle]");
      }
    } else if (section == "setpoint") {
      if (key == "d") cfg.setpoint = parse_array(cur);
      else fail(line_no, "unknown key '" + key + "' in [setpoint]");
    } else if (section == "initial_state") {
      if (key == "x0") cfg.x0 = parse_array(cur);
      else fail(line_no, "unknown key '" + key + "' in [initial_state]");
    } else if (section == "cost") {
      if (key == "kind") cfg.cost_kind = parse_string(cur);
      else if (key == "q") cfg.q = parse_array(cur);
      else if (key == "r") cfg.r = parse_array(cur);
      else if (key == "cancel_gcd") cfg.cancel_gcd = parse_bool(cur);
      else if (key == "scale") cfg.scale = parse_number(cur);
      else fail(line_no, "unknown key '" + key + "' in [cost]");
    } else if (section == "horizon") {
      if (key == "dt") cfg.dt = parse_number(cur);
      else if (key == "H") cfg.H = checked_int(parse_number(cur), line_no, "H");
      else if (key == "duration") cfg.duration = parse_number(cur);
      else fail(line_no, "unknown key '" + key + "' in [horizon]");
    } else if (section == "solver") {
      if (key == "max_iter")
        cfg.solver.max_iter = checked_int(parse_number(cur), line_no, "max_iter");
      else if (key == "tol") cfg.solver.tol = parse_number(cur);
      else if (key == "restarts")
        cfg.solver.restarts = checked_int(parse_number(cur), line_no, "restarts");
      else if (key == "seed")
        cfg.solver.seed = checked_u64(parse_number(cur), line_no, "seed");
      else if (key == "substeps")
        cfg.solver.substeps = checked_int(parse_number(cur), line_no, "substeps");
      else if (key == "warm_start") cfg.solver.warm_start = parse_bool(cur);
      else fail(line_no, "unknown key '" + key + "' in [solver]");
    } else if (section == "output") {
      if (key == "csv") cfg.output.csv = parse_string(cur);
      else if (key == "svg") cfg.output.svg = parse_string(cur);
      else if (key == "plot") cfg.output.plot = parse_bool(cur);
      else fail(line_no, "unknown key '" + key + "' in [output]");
    }
    expect_end();
  }

  if (cfg.vehicle.empty())
    throw ParseError(line_no, "missing required key: vehicle.name");
  if (cfg.setpoint.empty())
    throw ParseError(line_no, "missing required key: setpoint.d");
  if (cfg.x0.empty())
    throw ParseError(line_no, "missing required key: initial_state.x0");
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string dump_config(const ScenarioConfig& c) {
  std::ostringstream out;
  out << "[vehicle]\n";
  out << "name = " << quote(c.vehicle) << "\n";
  for (const char* p : {"wheelbase", "hitch1", "hitch2"}) {
    auto it = c.params.find(p);
    if (it != c.params.end())
      out << p << " = " << format_number(it->second) << "\n";
  }
  if (!c.u_min.empty()) out << "u_min = " << format_array(c.u_min) << "\n";
  if (!c.u_max.empty()) out << "u_max = " << format_array(c.u_max) << "\n";
  out << "\n[setpoint]\n";
  out << "d = " << format_array(c.setpoint) << "\n";
  out << "\n[initial_state]\n";
  out << "x0 = " << format_array(c.x0) << "\n";
  out << "\n[cost]\n";
  out << "kind = " << quote(c.cost_kind) << "\n";
  if (!c.q.empty()) out << "q = " << format_array(c.q) << "\n";
  if (!c.r.empty()) out << "r = " << format_array(c.r) << "\n";
  out << "cancel_gcd = " << (c.cancel_gcd ? "true" : "false") << "\n";
  out << "scale = " << format_number(c.scale) << "\n";
  out << "\n[horizon]\n";
  out << "dt = " << format_number(c.dt) << "\n";
  out << "H = " << c.H << "\n";
  out << "duration = " << format_number(c.duration) << "\n";
  out << "\n[solver]\n";
  out << "max_iter = " << c.solver.max_iter << "\n";
  out << "tol = " << format_number(c.solver.tol) << "\n";
  out << "restarts = " << c.solver.restarts << "\n";
  out << "seed = " << c.solver.seed << "\n";
  out << "substeps = " << c.solver.substeps << "\n";
  out << "warm_start = " << (c.solver.warm_start ? "true" : "false") << "\n";
  out << "\n[output]\n";
  if (!c.output.csv.empty()) out << "csv = " << quote(c.output.csv) << "\n";
  if (!c.output.svg.empty()) out << "svg = " << quote(c.output.svg) << "\n";
  out << "plot = " << (c.output.plot ? "true" : "false") << "\n";
  return out.str();
}

Scenario to_scenario(const ScenarioConfig& c) {
  Scenario sc;
  auto need = [&](const char* key) -> double {
    auto it = c.params.find(key);
    if (it == c.params.end())
      throw InvalidArgument(std::string("vehicle parameter '") + key +
                            "' is required for " + c.vehicle);
    return it->second;
  };
  auto reject = [&](std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : c.params) {
      (void)value;
      if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
            return key == a;
          }) == allowed.end())
        throw InvalidArgument("vehicle parameter '" + key +
                              "' does not apply to " + c.vehicle);
    }
  };
  if (c.vehicle == "unicycle") {
    reject({});
    sc.model = make_unicycle();
  } else if (c.vehicle == "kinematic_car") {
    reject({"wheelbase"});
    sc.model = make_kinematic_car(need("wheelbase"));
  } else if (c.vehicle == "one_trailer") {
    reject({"hitch1"});
    sc.model = make_one_trailer(need("hitch1"));
  } else if (c.vehicle == "two_trailer") {
    reject({"hitch1", "hitch2"});
    sc.model = make_two_trailer(need("hitch1"), need("hitch2"));
  } else {
    throw InvalidArgument("unknown vehicle '" + c.vehicle + "'");
  }

  const int n = sc.model.n_x;
  const int m = sc.model.n_u;
  if (static_cast<int>(c.setpoint.size()) != n)
    throw InvalidArgument("setpoint.d must have " + std::to_string(n) +
                          " entries for " + c.vehicle);
  if (static_cast<int>(c.x0.size()) != n)
    throw InvalidArgument("initial_state.x0 must have " + std::to_string(n) +
                          " entries for " + c.vehicle);
  sc.setpoint = Eigen::Map<const Vec>(c.setpoint.data(), n);
  sc.x0 = Eigen::Map<const Vec>(c.x0.data(), n);

  if (c.cost_kind == "tailored") {
    sc.cost.kind = CostKind::kTailored;
    sc.cost.q = c.q;
    sc.cost.r_in = c.r;
    sc.cost.cancel_gcd = c.cancel_gcd;
    sc.cost.scale = c.scale;
    if (!c.q.empty() && static_cast<int>(c.q.size()) != n)
      throw InvalidArgument("cost.q must have one entry per state");
    if (!c.r.empty() && static_cast<int>(c.r.size()) != m)
      throw InvalidArgument("cost.r must have one entry per input");
  } else if (c.cost_kind == "quadratic") {
    sc.cost.kind = CostKind::kQuadratic;
    if (!c.q.empty()) {
      if (static_cast<int>(c.q.size()) != n)
        throw InvalidArgument("cost.q must have one entry per state");
      sc.cost.Q = Eigen::Map<const Vec>(c.q.data(), n).asDiagonal();
    }
    if (!c.r.empty()) {
      if (static_cast<int>(c.r.size()) != m)
        throw InvalidArgument("cost.r must have one entry per input");
      sc.cost.R = Eigen::Map<const Vec>(c.r.data(), m).asDiagonal();
    }
  } else {
    throw InvalidArgument("cost.kind must be \"tailored\" or \"quadratic\"");
  }

  if (!c.u_min.empty() || !c.u_max.empty()) {
    if (static_cast<int>(c.u_min.size()) != m ||
        static_cast<int>(c.u_max.size()) != m)
      throw InvalidArgument("u_min and u_max must both have one entry per input");
    sc.bounds.resize(m);
    for (int j = 0; j < m; ++j) sc.bounds[j] = {c.u_min[j], c.u_max[j]};
  }

  sc.dt = c.dt;
  sc.H = c.H;
  sc.duration = c.duration;
  sc.solver = c.solver;
  return sc;
}

}  // namespace nhmpc
