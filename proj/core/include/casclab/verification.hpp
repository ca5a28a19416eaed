#pragma once

#include <string>
#include <vector>

#include "casclab/cascade.hpp"
#include "casclab/generator.hpp"
#include "casclab/laplace.hpp"

namespace casclab {
namespace verify {

struct Check {
  std::string name;
  bool passed = false;
  std::string details;
  double seconds = 0.0;
};

struct SuiteReport {
  std::string suite;
  std::vector<Check> checks;
  bool passed = false;
  double seconds = 0.0;
};

// Heavy shared inputs (iterated transforms, the fixed-point pool, exact
// depth-20 samples) built once per process with pinned seeds. Suites that
// share an artifact see the identical object, so cross-method comparisons
// are not diluted by re-simulation noise.
class Workbench {
 public:
  int workers = 0;  // <= 0 picks the default worker count

  const GeneratorSpec& lognormal_spec();        // lognormal sigma = 0.5
  const GeneratorSpec& logweibull_spec();       // log-weibull c = 1, gamma = 1.5
  const LaplaceTable& lognormal_table();        // iterated on [1e-2, 1e8]
  const LaplaceTable& logweibull_table();
  const TailCertificate& lognormal_cert();      // cdf-lower on [1e-12, 0.2]
  const CascadePool& pool();                    // 1e5 values, 50 generations
  const std::vector<double>& depth20_samples(); // 1e4 exact depth-20 draws
  const std::vector<double>& depth16_samples(); // 1e5 exact depth-16 draws

 private:
  GeneratorSpec lognormal_ = make_lognormal(0.5);
  GeneratorSpec logweibull_ = make_log_weibull(1.0, 1.5);
  // one-element when built; empty before first use
  std::vector<LaplaceTable> ln_table_, lw_table_;
  std::vector<TailCertificate> cert_;
  std::vector<CascadePool> pool_;
  std::vector<std::vector<double>> depth20_, depth16_;
};

std::vector<Check> degenerate_checks(Workbench& bench);
std::vector<Check> martingale_checks(Workbench& bench);
std::vector<Check> fixpoint_checks(Workbench& bench);
std::vector<Check> sandwich_checks(Workbench& bench);
std::vector<Check> chaos_cov_checks(Workbench& bench);
std::vector<Check> chaos_mass_checks(Workbench& bench);
std::vector<Check> decompose_checks(Workbench& bench);
std::vector<Check> alpha_checks(Workbench& bench);

const std::vector<std::string>& suite_names();
SuiteReport run_suite(const std::string& suite, Workbench& bench);

}  // namespace verify
}  // namespace casclab
