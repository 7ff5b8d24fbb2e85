#pragma once

#include "mulreg/serialize.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace mulreg {

//! Every knob of every subcommand. JSON keys are the flag names with '-'
//! replaced by '_'.
struct RunConfig {
  std::string fn = "f1";
  std::size_t n = 100;
  int d = 1;
  int b = 2;
  double q = 1.0;
  double y = 0.5;
  double h = 0.0;
  std::string mode = "practical";
  double c_thr = kDefaultThresholdConstant;
  std::string method = "auto";
  int nodes = 64;
  std::size_t proposals = 200000;
  std::uint64_t seed = 0;
  std::size_t reps = 1000;
  std::string out;
  int workers = 0;
  std::string backend = "openmp";
  double a_low = 0.0;
  double m_up = 0.0;
  double beta = 2.0;
  double lipschitz = 1.0;
  std::string estimator = "fixed";
  std::vector<double> candidates;
  std::vector<double> eps;
  std::string noise = "uniform";
  std::vector<std::string> functions{"f1", "f2", "f3"};
  std::vector<std::size_t> ns;
  std::size_t points = 100;
};

inline const std::vector<std::string> kCommands{"simulate", "estimate", "adapt", "oracle", "replicate-table",
                                                "replicate-f4", "rate", "tail"};

//! Defaults differ per command (sample sizes, reps, node counts).
RunConfig defaults_for(const std::string& command);

Json to_json(const RunConfig& c);
//! Overwrites the fields present in j. Throws Config on unknown keys or
//! mistyped values.
void merge_json(RunConfig& c, const Json& j);

//! Reads a JSON object; a run manifest is accepted and its config used.
Json load_config(const std::filesystem::path& path);

//! Throws (validation kinds) when a field violates the command's preconditions.
void validate(const std::string& command, const RunConfig& c);

//! Runs one command, writing outputs and manifest.json under out_dir.
//! Returns the JSON summary also printed to stdout.
Json run_command(const std::string& command, const RunConfig& c, const std::filesystem::path& out_dir);

//! Full front end: 0 success, 2 validation or usage error, 3 estimation error.
int cli_dispatch(int argc, char** argv);

} // namespace mulreg
