#pragma once

#include <iosfwd>
#include <string>

#include "lsrb/model_io.hpp"

namespace lsrb {

// Full run description; serialized into every CSV header for provenance.
struct RunConfig {
  std::string problem = "thermal1";
  int n = 16;
  int z_depth = 3;
  int train_count = -1;  // -1 picks the problem default (thermal1 50, thermal3 75)
  std::uint64_t train_seed = 42;
  double delta0 = 0.1;
  int n_max = 30;
  double scm_eps = 0.05;
  std::uint64_t scm_seed = 44;
  int test_count = 100;
  std::uint64_t test_seed = 43;
  int ref_depth = 2;
  int bench_count = 20;
  std::string out = ".";
  std::string model;

  int train_count_effective() const;
  std::string provenance() const;
};

// key=value lines, '#' comments; unknown keys are errors
RunConfig parse_config_file(const std::string& path, RunConfig base = {});
// master seed S: train S, test S+1, scm S+2
void apply_master_seed(RunConfig& c, std::uint64_t seed);

ProblemDef make_problem(const RunConfig& c);

int cmd_offline(const RunConfig& c, std::ostream& out, std::ostream& err);
int cmd_online(const RunConfig& c, const ParamVec& mu, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& c, std::ostream& out, std::ostream& err);
int cmd_bench(const RunConfig& c, std::ostream& out, std::ostream& err);
int cmd_scm(const RunConfig& c, std::ostream& out, std::ostream& err);
int cmd_demo_coercivity(const RunConfig& c, int levels, std::ostream& out, std::ostream& err);
int cmd_demo_tridiag(const RunConfig& c, const std::vector<int>& sizes, std::ostream& out,
                     std::ostream& err);

int run_cli(int argc, const char* const* argv);

}  // namespace lsrb
