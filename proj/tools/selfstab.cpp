#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "selfstab/experiment.hpp"

namespace ex = selfstab::experiment;

namespace {

constexpr int kInputError = 3;

// SELFSTAB_LOG=0 silences progress lines on stderr; higher values are chattier.
int log_level() {
  const char* s = std::getenv("SELFSTAB_LOG");
  return s ? std::atoi(s) : 1;
}

void log(int level, const std::string& msg) {
  if (log_level() >= level) std::cerr << msg << '\n';
}

// "6..48:6", "2,4" or "7".
template <typename T>
std::vector<T> parse_range(const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto dots = part.find("..");
    if (dots == std::string::npos) {
      out.push_back(static_cast<T>(std::stoll(part)));
      continue;
    }
    const auto colon = part.find(':', dots);
    const long long lo = std::stoll(part.substr(0, dots));
    const long long hi = std::stoll(part.substr(dots + 2, colon - dots - 2));
    const long long step = colon == std::string::npos ? 1 : std::stoll(part.substr(colon + 1));
    if (step <= 0 || hi < lo) throw ex::InputError("bad range '" + part + "'");
    for (long long x = lo; x <= hi; x += step) out.push_back(static_cast<T>(x));
  }
  if (out.empty()) throw ex::InputError("empty range '" + text + "'");
  return out;
}

int finish(const ex::RunSpec& spec, const ex::Outcome& o) {
  if (spec.trace_path) {
    std::ofstream t(*spec.trace_path);
    if (!t) throw ex::InputError("cannot write " + spec.trace_path->string());
    t << o.trace;
  }
  if (spec.report_path) {
    std::ofstream r(*spec.report_path);
    if (!r) throw ex::InputError("cannot write " + spec.report_path->string());
    r << ex::report_json(o).dump(2) << '\n';
  }
  std::cout << ex::summary_json(o, spec).dump() << '\n';
  if (log_level() >= 2) std::cout << ex::report_json(o).dump(2) << '\n';
  return ex::exit_code(o);
}

int cmd_run(const std::string& path, const std::string& corrupt) {
  const ex::RunSpec spec = ex::load_descriptor(path);
  ex::Options opt;
  if (!corrupt.empty()) opt.corruption = ex::parse_corruption(corrupt);
  log(2, "running n=" + std::to_string(spec.graph.size()) + " k=" + std::to_string(spec.k));
  return finish(spec, ex::execute(spec, opt));
}

int cmd_sweep(const std::string& family, const std::string& ns, const std::string& ks, const std::string& seeds,
              const std::string& out, unsigned threads) {
  const auto rows = ex::sweep(family, parse_range<std::size_t>(ns), parse_range<int>(ks),
                              parse_range<std::uint64_t>(seeds), threads);
  if (out.empty() || out == "-") {
    ex::write_csv(std::cout, rows);
  } else {
    std::ofstream f(out);
    if (!f) throw ex::InputError("cannot write " + out);
    ex::write_csv(f, rows);
    log(1, "wrote " + std::to_string(rows.size()) + " rows to " + out);
  }
  for (const auto& r : rows)
    if (!r.verdict) return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-stabilizing k-grouping simulator"};
  app.require_subcommand(1);

  std::string run_path;
  auto* run = app.add_subcommand("run", "Execute one run descriptor");
  run->add_option("descriptor", run_path, "Run descriptor (JSON)")->required();

  std::string inject_path, corrupt;
  auto* inject = app.add_subcommand("inject", "Run with a mid-run corruption");
  inject->add_option("descriptor", inject_path, "Run descriptor (JSON)")->required();
  inject->add_option("--corrupt", corrupt, "vars=cl+mode+rst,count=10,seed=3,at=50")->required();

  std::string family, ns, ks, seeds = "1..5", out;
  unsigned threads = 0;
  auto* sw = app.add_subcommand("sweep", "Scaling sweep from random initial configurations");
  sw->add_option("--family", family, "path, cycle, grid or random-gnp")->required();
  sw->add_option("--n", ns, "Sizes, e.g. 6..48:6")->required();
  sw->add_option("--k", ks, "Diameter bounds, e.g. 2,4")->required();
  sw->add_option("--seeds", seeds, "Seeds, e.g. 1..5");
  sw->add_option("--out", out, "CSV output path (stdout when omitted)");
  sw->add_option("--threads", threads, "Worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kInputError;
  }

  try {
    if (*run) return cmd_run(run_path, "");
    if (*inject) return cmd_run(inject_path, corrupt);
    return cmd_sweep(family, ns, ks, seeds, out, threads);
  } catch (const ex::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
  } catch (const selfstab::kgrouping::ParameterError& e) {
    std::cerr << "input error: " << e.what() << '\n';
  } catch (const selfstab::GraphError& e) {
    std::cerr << "input error: " << e.what() << '\n';
  } catch (const std::logic_error& e) {
    std::cerr << "input error: " << e.what() << '\n';
  }
  return kInputError;
}
