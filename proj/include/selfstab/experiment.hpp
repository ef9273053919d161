#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "selfstab/graph.hpp"
#include "selfstab/kgrouping.hpp"
#include "selfstab/oracle.hpp"
#include "selfstab/rng.hpp"
#include "selfstab/runtime.hpp"

namespace selfstab::experiment {

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class InitMode { zeroed, random, file };

struct InitSpec {
  InitMode mode = InitMode::zeroed;
  std::uint64_t seed = 1;
  std::filesystem::path path;  // adversarial configuration file
};

// Every process gets a random value for `count` (process, variable) slots
// drawn among the named variables, at step `at`.
struct Corruption {
  std::vector<std::string> vars;
  std::size_t count = 0;
  std::uint64_t seed = 1;
  std::size_t at = 0;
};

Corruption parse_corruption(const std::string& text);  // "vars=cl+mode,count=10,seed=3,at=50"

struct RunSpec {
  Graph graph = make_path(2);
  int k = 1;
  DaemonPolicy daemon;
  std::optional<std::size_t> max_steps;  // default_budget when empty
  InitSpec init;
  std::optional<std::filesystem::path> trace_path;
  std::optional<std::filesystem::path> report_path;
};

// Reads a run descriptor. Relative paths resolve against the descriptor's
// directory.
RunSpec load_descriptor(const std::filesystem::path& path);
RunSpec parse_descriptor(const nlohmann::json& j, const std::filesystem::path& base);

// Initial configurations.
Configuration zeroed_configuration(const kgrouping::Instance& inst, const Graph& g);
// Uniform values in every declared range; identifiers are drawn from the
// real ids plus a pool of false ids, and nullable slots may be ⊥.
Configuration random_configuration(const kgrouping::Instance& inst, const Graph& g, std::uint64_t seed);
Configuration make_initial(const kgrouping::Instance& inst, const Graph& g, const InitSpec& spec);

nlohmann::json configuration_to_json(const Schema& schema, const Graph& g, const Configuration& cfg);
Configuration configuration_from_json(const Schema& schema, const Graph& g, const nlohmann::json& j);

// Randomizes the chosen slots in place. Returns the number of slots written.
std::size_t corrupt(const kgrouping::Instance& inst, const Graph& g, Configuration& cfg, const Corruption& c);
// Number of (process, variable) slots in a configuration.
std::size_t slot_count(const kgrouping::Instance& inst, const Graph& g);

// One Merge iteration boundary: the root has just turned 2 in mode A after
// a clean 0 -> 1 -> 2 sweep, so the current Merge execution has terminated.
struct Boundary {
  std::size_t step = 0;
  bool wave_ok = false;        // all cl = 2, rst = 0, mode A, Merge disabled
  bool shift_ok = false;       // no E(v) after the copy shift
  std::size_t stamp_errors = 0;
  oracle::Potential potential;  // of the shifted configuration
  bool goal = false;            // shifted configuration already in C_goal
  std::size_t merge_rounds = 0;  // rounds of Merge alone from the shifted configuration
  bool merge_terminated = true;
};

struct Outcome {
  Verdict verdict = Verdict::terminated;
  std::size_t steps = 0;
  std::size_t rounds = 0;
  std::size_t iterations = 0;  // copy waves started by the root
  bool cfin = false;
  oracle::GroupingReport report;
  std::vector<Boundary> boundaries;
  std::size_t max_stored_keys = 0;
  std::size_t false_ids = 0;  // identifiers in initial domains matching no process
  Configuration final;
  std::string trace;  // JSON lines when requested
};

struct Options {
  bool instrument = false;
  bool keep_trace = false;
  std::optional<Corruption> corruption;
};

Outcome execute(const RunSpec& spec, const Options& options = {});
Outcome execute(const kgrouping::Instance& inst, const Graph& g, const Configuration& cfg0,
                const DaemonPolicy& daemon, std::size_t max_steps, const Options& options = {});

nlohmann::json summary_json(const Outcome& o, const RunSpec& spec);
nlohmann::json report_json(const Outcome& o);
std::string step_line(const StepRecord& rec, std::size_t step, bool round_end, const std::vector<std::string>& labels);

// Exit status: 0 terminated with a valid grouping, 1 invalid grouping,
// 2 budget exhausted.
int exit_code(const Outcome& o);

// Sweep rows.
struct SweepRow {
  std::string family;
  std::size_t n = 0;
  std::size_t D = 0;
  int k = 0;
  std::uint64_t seed = 0;
  std::size_t rounds = 0;
  std::size_t iterations = 0;
  std::size_t groups = 0;
  bool verdict = false;
  std::size_t steps = 0;
};

Graph make_family(const std::string& family, std::size_t n, std::uint64_t seed);
SweepRow sweep_one(const std::string& family, std::size_t n, int k, std::uint64_t seed);
std::vector<SweepRow> sweep(const std::string& family, const std::vector<std::size_t>& ns, const std::vector<int>& ks,
                            const std::vector<std::uint64_t>& seeds, unsigned threads = 0);
void write_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace selfstab::experiment
