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

// Batch front end for the nhmpc library: analysis reports, closed-loop runs
// with CSV/SVG output, and side-by-side comparison of two scenarios. Talks to
// the core exclusively through the public C interface.
//
// Exit codes: 0 success, 1 numerical failure, 2 usage or config error.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <future>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nhmpc.h"

namespace {

constexpr int kExitSuccess = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitUsage = 2;

int exit_code_for(nhmpc_status status) {
  switch (status) {
    case NHMPC_OK:
      return kExitSuccess;
    case NHMPC_ERR_PARSE:
    case NHMPC_ERR_INVALID_ARGUMENT:
    case NHMPC_ERR_PARAMETER:
      return kExitUsage;
    default:
      return kExitNumerical;
  }
}

void print_failure(const std::string& where, nhmpc_status status) {
  std::fprintf(stderr, "error (%s): %s [%s]\n", where.c_str(),
               nhmpc_last_error(), nhmpc_status_name(status));
}

// Query-then-fill helper for the C interface's text outputs.
template <class Fn>
nhmpc_status fetch_text(Fn&& fn, std::string& out) {
  size_t needed = 0;
  nhmpc_status status = fn(nullptr, 0, &needed);
  if (status != NHMPC_OK) return status;
  std::vector<char> buffer(needed);
  status = fn(buffer.data(), buffer.size(), &needed);
  if (status == NHMPC_OK) out.assign(buffer.data());
  return status;
}

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

bool write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return false;
  out << content;
  return bool(out);
}

struct ScenarioHandle {
  nhmpc_scenario* ptr = nullptr;
  ~ScenarioHandle() { nhmpc_scenario_destroy(ptr); }
};

struct TraceHandle {
  nhmpc_trace* ptr = nullptr;
  ~TraceHandle() { nhmpc_trace_destroy(ptr); }
};

// Loads a config file into a scenario, applying the optional seed override.
int load_scenario(const std::string& path, bool has_seed, uint64_t seed,
                  ScenarioHandle& scenario) {
  std::string text;
  if (!read_file(path, text)) {
    std::fprintf(stderr, "error: cannot read config file '%s'\n",
                 path.c_str());
    return kExitUsage;
  }
  nhmpc_status status =
      nhmpc_scenario_create_from_config(text.c_str(), &scenario.ptr);
  if (status != NHMPC_OK) {
    print_failure(path, status);
    return exit_code_for(status);
  }
  if (has_seed) {
    status = nhmpc_scenario_set_seed(scenario.ptr, seed);
    if (status != NHMPC_OK) {
      print_failure(path, status);
      return exit_code_for(status);
    }
  }
  return kExitSuccess;
}

std::string scenario_text(const nhmpc_scenario* scenario,
                          nhmpc_status (*fn)(const nhmpc_scenario*, char*,
                                             size_t, size_t*)) {
  std::string out;
  fetch_text([&](char* b, size_t c, size_t* n) { return fn(scenario, b, c, n); },
             out);
  return out;
}

// Joins --out DIR with a configured or derived file name. Absolute names win.
std::string resolve_path(const std::string& out_dir, const std::string& name) {
  if (out_dir.empty() || (!name.empty() && name.front() == '/')) return name;
  if (!out_dir.empty() && out_dir.back() == '/') return out_dir + name;
  return out_dir + "/" + name;
}

std::string cost_kind_name(const nhmpc_scenario* scenario) {
  return nhmpc_scenario_cost_kind(scenario) == 0 ? "tailored" : "quadratic";
}

// File stem used when the config does not name its outputs.
std::string derived_stem(const nhmpc_scenario* scenario) {
  return scenario_text(scenario, nhmpc_scenario_vehicle_name) + "_" +
         cost_kind_name(scenario);
}

int final_deviation(const nhmpc_trace* trace, const nhmpc_scenario* scenario,
                    std::vector<double>& deviation, double& max_abs) {
  const int n = nhmpc_trace_num_states(trace);
  const int rows = nhmpc_trace_rows(trace);
  std::vector<double> x(n), d(n);
  nhmpc_status status =
      nhmpc_trace_row(trace, rows - 1, nullptr, x.data(), nullptr, nullptr,
                      nullptr, nullptr);
  if (status != NHMPC_OK) return exit_code_for(status);
  status = nhmpc_scenario_setpoint(scenario, d.data());
  if (status != NHMPC_OK) return exit_code_for(status);
  deviation.resize(n);
  max_abs = 0.0;
  for (int i = 0; i < n; ++i) {
    deviation[i] = x[i] - d[i];
    max_abs = std::max(max_abs, std::abs(deviation[i]));
  }
  return kExitSuccess;
}

// One-line outcome used by `compare`: did the loop reach the setpoint, did
// it never move, or neither.
std::string verdict_line(const nhmpc_trace* trace,
                         const nhmpc_scenario* scenario) {
  std::vector<double> deviation;
  double max_abs = 0.0;
  if (final_deviation(trace, scenario, deviation, max_abs) != kExitSuccess)
    return "verdict: unavailable";
  int stationary = 0;
  nhmpc_trace_stationary(trace, 1e-6, &stationary);
  char buf[128];
  if (nhmpc_trace_diverged(trace)) {
    std::snprintf(buf, sizeof buf, "verdict: diverged");
  } else if (stationary != 0) {
    std::snprintf(buf, sizeof buf,
                  "verdict: stationary (never left the initial state, final "
                  "deviation %.3e)",
                  max_abs);
  } else if (max_abs < 1e-3) {
    std::snprintf(buf, sizeof buf, "verdict: converged (final deviation %.3e)",
                  max_abs);
  } else {
    std::snprintf(buf, sizeof buf,
                  "verdict: moved but not settled (final deviation %.3e)",
                  max_abs);
  }
  return buf;
}

// Shared by `run` and `compare`: CSV always, SVG on request. Returns an exit
// code; prints what it wrote.
int write_outputs(const nhmpc_trace* trace, const nhmpc_scenario* scenario,
                  const std::string& out_dir, bool force_svg,
                  const std::string& csv_override) {
  std::string csv_name = csv_override.empty()
                             ? scenario_text(scenario, [](const auto* s, char* b,
                                                          size_t c, size_t* n) {
                                 return nhmpc_scenario_output_path(s, 0, b, c, n);
                               })
                             : csv_override;
  if (csv_name.empty()) csv_name = derived_stem(scenario) + ".csv";
  const std::string csv_path = resolve_path(out_dir, csv_name);

  std::string csv;
  nhmpc_status status = fetch_text(
      [&](char* b, size_t c, size_t* n) {
        return nhmpc_trace_to_csv(trace, b, c, n);
      },
      csv);
  if (status != NHMPC_OK) {
    print_failure("csv", status);
    return exit_code_for(status);
  }
  if (!write_file(csv_path, csv)) {
    std::fprintf(stderr, "error: cannot write '%s'\n", csv_path.c_str());
    return kExitUsage;
  }
  std::printf("wrote %s\n", csv_path.c_str());

  const bool want_svg = force_svg || nhmpc_scenario_plot_requested(scenario);
  if (want_svg && nhmpc_trace_rows(trace) >= 2) {
    std::string svg_name = scenario_text(
        scenario, [](const auto* s, char* b, size_t c, size_t* n) {
          return nhmpc_scenario_output_path(s, 1, b, c, n);
        });
    if (svg_name.empty()) svg_name = derived_stem(scenario) + ".svg";
    const std::string svg_path = resolve_path(out_dir, svg_name);
    const std::string title = scenario_text(scenario,
                                            nhmpc_scenario_vehicle_name) +
                              " (" + cost_kind_name(scenario) + " cost)";
    std::string svg;
    status = fetch_text(
        [&](char* b, size_t c, size_t* n) {
          return nhmpc_trace_svg(trace, cost_kind_name(scenario).c_str(),
                                 nullptr, nullptr, title.c_str(), b, c, n);
        },
        svg);
    if (status != NHMPC_OK) {
      print_failure("svg", status);
      return exit_code_for(status);
    }
    if (!write_file(svg_path, svg)) {
      std::fprintf(stderr, "error: cannot write '%s'\n", svg_path.c_str());
      return kExitUsage;
    }
    std::printf("wrote %s\n", svg_path.c_str());
  } else if (want_svg) {
    std::printf("plot skipped: trace has fewer than two samples\n");
  }
  return kExitSuccess;
}

int cmd_analyze(const std::string& config_path, bool has_seed, uint64_t seed,
                bool dump) {
  ScenarioHandle scenario;
  int code = load_scenario(config_path, has_seed, seed, scenario);
  if (code != kExitSuccess) return code;
  if (dump) {
    std::fputs(scenario_text(scenario.ptr, nhmpc_scenario_dump_config).c_str(),
               stdout);
    return kExitSuccess;
  }
  std::string report;
  nhmpc_status status = fetch_text(
      [&](char* b, size_t c, size_t* n) {
        return nhmpc_scenario_analyze(scenario.ptr, b, c, n);
      },
      report);
  if (status != NHMPC_OK) {
    print_failure("analyze", status);
    return exit_code_for(status);
  }
  std::fputs(report.c_str(), stdout);
  return kExitSuccess;
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            bool force_svg, bool has_seed, uint64_t seed, bool dump) {
  ScenarioHandle scenario;
  int code = load_scenario(config_path, has_seed, seed, scenario);
  if (code != kExitSuccess) return code;
  if (dump) {
    std::fputs(scenario_text(scenario.ptr, nhmpc_scenario_dump_config).c_str(),
               stdout);
    return kExitSuccess;
  }

  TraceHandle trace;
  nhmpc_status status = nhmpc_run_closed_loop(scenario.ptr, &trace.ptr);
  if (status != NHMPC_OK) {
    print_failure("run", status);
    return exit_code_for(status);
  }

  std::string summary;
  status = fetch_text(
      [&](char* b, size_t c, size_t* n) {
        return nhmpc_trace_summary(trace.ptr, b, c, n);
      },
      summary);
  if (status != NHMPC_OK) {
    print_failure("summary", status);
    return exit_code_for(status);
  }
  std::fputs(summary.c_str(), stdout);

  code = write_outputs(trace.ptr, scenario.ptr, out_dir, force_svg, "");
  if (code != kExitSuccess) return code;
  return nhmpc_trace_diverged(trace.ptr) ? kExitNumerical : kExitSuccess;
}

int cmd_compare(const std::vector<std::string>& config_paths,
                const std::string& out_dir, bool force_svg, bool has_seed,
                uint64_t seed) {
  ScenarioHandle a, b;
  int code = load_scenario(config_paths[0], has_seed, seed, a);
  if (code != kExitSuccess) return code;
  code = load_scenario(config_paths[1], has_seed, seed, b);
  if (code != kExitSuccess) return code;

  const std::string name_a = scenario_text(a.ptr, nhmpc_scenario_vehicle_name);
  const std::string name_b = scenario_text(b.ptr, nhmpc_scenario_vehicle_name);
  if (name_a != name_b) {
    std::fprintf(stderr, "error: vehicles differ ('%s' vs '%s')\n",
                 name_a.c_str(), name_b.c_str());
    return kExitUsage;
  }
  const int n = nhmpc_scenario_num_states(a.ptr);
  std::vector<double> x0_a(n), x0_b(n);
  nhmpc_scenario_initial_state(a.ptr, x0_a.data());
  nhmpc_scenario_initial_state(b.ptr, x0_b.data());
  if (x0_a != x0_b) {
    std::fprintf(stderr, "error: initial states differ\n");
    return kExitUsage;
  }

  // Both loops run concurrently; every file each one writes is its own.
  auto run_one = [](const nhmpc_scenario* scenario) {
    nhmpc_trace* trace = nullptr;
    const nhmpc_status status = nhmpc_run_closed_loop(scenario, &trace);
    return std::pair<nhmpc_status, nhmpc_trace*>(status, trace);
  };
  auto future_a = std::async(std::launch::async, run_one, a.ptr);
  auto future_b = std::async(std::launch::async, run_one, b.ptr);
  auto [status_a, raw_a] = future_a.get();
  auto [status_b, raw_b] = future_b.get();
  TraceHandle trace_a{raw_a}, trace_b{raw_b};
  if (status_a != NHMPC_OK) {
    print_failure(config_paths[0], status_a);
    return exit_code_for(status_a);
  }
  if (status_b != NHMPC_OK) {
    print_failure(config_paths[1], status_b);
    return exit_code_for(status_b);
  }

  const std::string label_a = cost_kind_name(a.ptr) + " [A]";
  const std::string label_b = cost_kind_name(b.ptr) + " [B]";
  for (auto [label, path, trace, scenario] :
       {std::tuple{label_a, config_paths[0], trace_a.ptr, a.ptr},
        std::tuple{label_b, config_paths[1], trace_b.ptr, b.ptr}}) {
    std::printf("--- %s: %s ---\n", label.c_str(), path.c_str());
    std::string summary;
    if (fetch_text(
            [&](char* buf, size_t cap, size_t* need) {
              return nhmpc_trace_summary(trace, buf, cap, need);
            },
            summary) == NHMPC_OK) {
      std::fputs(summary.c_str(), stdout);
    }
    std::printf("%s\n\n", verdict_line(trace, scenario).c_str());
  }

  // Scenario-local CSVs; disambiguate when both resolve to the same name.
  std::string csv_a, csv_b;
  {
    auto configured = [](const nhmpc_scenario* s) {
      std::string out;
      fetch_text(
          [&](char* buf, size_t cap, size_t* need) {
            return nhmpc_scenario_output_path(s, 0, buf, cap, need);
          },
          out);
      return out;
    };
    csv_a = configured(a.ptr);
    csv_b = configured(b.ptr);
    if (csv_a.empty()) csv_a = derived_stem(a.ptr) + ".csv";
    if (csv_b.empty()) csv_b = derived_stem(b.ptr) + ".csv";
    if (csv_a == csv_b) {
      csv_a.insert(csv_a.size() - 4, "_a");
      csv_b.insert(csv_b.size() - 4, "_b");
    }
  }
  code = write_outputs(trace_a.ptr, a.ptr, out_dir, false, csv_a);
  if (code != kExitSuccess) return code;
  code = write_outputs(trace_b.ptr, b.ptr, out_dir, false, csv_b);
  if (code != kExitSuccess) return code;

  const bool want_svg = force_svg || nhmpc_scenario_plot_requested(a.ptr) ||
                        nhmpc_scenario_plot_requested(b.ptr);
  if (want_svg && nhmpc_trace_rows(trace_a.ptr) >= 2 &&
      nhmpc_trace_rows(trace_b.ptr) >= 2) {
    const std::string title = name_a + ": " + cost_kind_name(a.ptr) + " vs " +
                              cost_kind_name(b.ptr);
    std::string svg;
    const nhmpc_status status = fetch_text(
        [&](char* buf, size_t cap, size_t* need) {
          return nhmpc_trace_svg(trace_a.ptr, label_a.c_str(), trace_b.ptr,
                                 label_b.c_str(), title.c_str(), buf, cap,
                                 need);
        },
        svg);
    if (status != NHMPC_OK) {
      print_failure("svg", status);
      return exit_code_for(status);
    }
    const std::string svg_path = resolve_path(out_dir, "compare.svg");
    if (!write_file(svg_path, svg)) {
      std::fprintf(stderr, "error: cannot write '%s'\n", svg_path.c_str());
      return kExitUsage;
    }
    std::printf("wrote %s\n", svg_path.c_str());
  }

  const bool diverged = nhmpc_trace_diverged(trace_a.ptr) != 0 ||
                        nhmpc_trace_diverged(trace_b.ptr) != 0;
  return diverged ? kExitNumerical : kExitSuccess;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nhmpc: analysis and receding-horizon control of driftless "
               "non-holonomic vehicles"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  std::string config_path, out_dir;
  std::vector<std::string> compare_paths;
  bool force_svg = false, dump = false;
  uint64_t seed = 0;
  bool has_seed = false;

  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Override the solver seed")
        ->each([&](const std::string&) { has_seed = true; });
  };

  CLI::App* analyze =
      app.add_subcommand("analyze", "Print the setpoint analysis report");
  analyze->add_option("--config", config_path, "Scenario config file")
      ->required();
  analyze->add_flag("--dump-config", dump,
                    "Print the canonical config and exit");
  add_seed(analyze);

  CLI::App* chart = app.add_subcommand(
      "chart", "Print the coordinate maps and approximation table");
  chart->add_option("--config", config_path, "Scenario config file")
      ->required();
  add_seed(chart);

  CLI::App* run =
      app.add_subcommand("run", "Run the closed loop and write its outputs");
  run->add_option("--config", config_path, "Scenario config file")->required();
  run->add_option("--out", out_dir, "Directory for output files");
  run->add_flag("--svg", force_svg, "Write the SVG plot even if the config "
                                    "does not request one");
  run->add_flag("--dump-config", dump, "Print the canonical config and exit");
  add_seed(run);

  CLI::App* compare = app.add_subcommand(
      "compare", "Run two scenarios concurrently and report side by side");
  compare->add_option("--config", compare_paths,
                      "Two scenario config files (give the flag twice)")
      ->required()
      ->expected(2);
  compare->add_option("--out", out_dir, "Directory for output files");
  compare->add_flag("--svg", force_svg, "Write the combined SVG plot");
  add_seed(compare);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitSuccess : kExitUsage;
  }

  if (analyze->parsed())
    return cmd_analyze(config_path, has_seed, seed, dump);
  if (chart->parsed()) return cmd_analyze(config_path, has_seed, seed, false);
  if (run->parsed())
    return cmd_run(config_path, out_dir, force_svg, has_seed, seed, dump);
  if (compare->parsed())
    return cmd_compare(compare_paths, out_dir, force_svg, has_seed, seed);
  return kExitUsage;
}
