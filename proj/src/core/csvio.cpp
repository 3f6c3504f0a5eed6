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

#include "csvio.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace nhmpc {
namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t at = line.find(sep, start);
    if (at == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, at - start));
    start = at + 1;
  }
}

double parse_double_field(const std::string& field, int line) {
  double v = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [next, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || next != end)
    throw ParseError(line, "malformed number '" + field + "'");
  return v;
}

SolveStatus parse_status_field(const std::string& field, int line) {
  if (field == "converged") return SolveStatus::kConverged;
  if (field == "max_iter") return SolveStatus::kMaxIter;
  if (field == "infeasible_guess") return SolveStatus::kInfeasibleGuess;
  throw ParseError(line, "unknown status '" + field + "'");
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, end);
}

std::string trace_to_csv(const ClosedLoopTrace& trace) {
  const int n = static_cast<int>(trace.states.cols());
  const int m = static_cast<int>(trace.inputs.cols());
  std::string out = "t";
  for (int i = 1; i <= n; ++i) out += ",x" + std::to_string(i);
  for (int j = 1; j <= m; ++j) out += ",u" + std::to_string(j);
  out += ",V,iters,status\n";
  for (int k = 0; k < trace.rows(); ++k) {
    out += format_double(trace.times[k]);
    for (int i = 0; i < n; ++i) out += "," + format_double(trace.states(k, i));
    for (int j = 0; j < m; ++j) out += "," + format_double(trace.inputs(k, j));
    out += "," + format_double(trace.value[k]);
    out += "," + std::to_string(trace.diagnostics[k].iterations);
    out += ",";
    out += to_string(trace.diagnostics[k].status);
    out += "\n";
  }
  return out;
}

ClosedLoopTrace trace_from_csv(const std::string& text) {
  std::istringstream stream(text);
  std::string line;
  if (!std::getline(stream, line))
    throw ParseError(1, "empty trace document");
  const std::vector<std::string> header = split(line, ',');
  if (header.size() < 5 || header.front() != "t" ||
      header.back() != "status" || header[header.size() - 2] != "iters" ||
      header[header.size() - 3] != "V")
    throw ParseError(1, "unexpected header layout");
  int n = 0, m = 0;
  for (std::size_t i = 1; i + 3 < header.size(); ++i) {
    if (header[i] == "x" + std::to_string(n + 1) && m == 0) ++n;
    else if (header[i] == "u" + std::to_string(m + 1)) ++m;
    else throw ParseError(1, "unexpected column '" + header[i] + "'");
  }
  if (n == 0 || m == 0) throw ParseError(1, "missing state or input columns");

  std::vector<std::vector<double>> rows;
  std::vector<int> iters;
  std::vector<SolveStatus> statuses;
  int line_no = 1;
  while (std::getline(stream, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split(line, ',');
    if (fields.size() != header.size())
      throw ParseError(line_no, "wrong number of fields");
    std::vector<double> numeric(fields.size() - 2);
    for (std::size_t i = 0; i + 2 < fields.size(); ++i)
      numeric[i] = parse_double_field(fields[i], line_no);
    rows.push_back(std::move(numeric));
    iters.push_back(static_cast<int>(
        parse_double_field(fields[fields.size() - 2], line_no)));
    statuses.push_back(parse_status_field(fields.back(), line_no));
  }

  ClosedLoopTrace trace;
  const int rows_n = static_cast<int>(rows.size());
  trace.times.resize(rows_n);
  trace.states.resize(rows_n, n);
  trace.inputs.resize(rows_n, m);
  trace.value.resize(rows_n);
  trace.diagnostics.resize(rows_n);
  for (int k = 0; k < rows_n; ++k) {
    const std::vector<double>& row = rows[k];
    trace.times[k] = row[0];
    for (int i = 0; i < n; ++i) trace.states(k, i) = row[1 + i];
    for (int j = 0; j < m; ++j) trace.inputs(k, j) = row[1 + n + j];
    trace.value[k] = row[1 + n + m];
    trace.diagnostics[k] = {iters[k], 0.0, statuses[k]};
  }
  return trace;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write file: " + path);
  out << content;
  if (!out) throw Error("write failed: " + path);
}

}  // namespace nhmpc
