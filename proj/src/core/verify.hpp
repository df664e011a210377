// Sampling-based certification of everything a model declares: torsions,
// operator algebras, chains, involution, chart maps, separation matrices,
// separated-solution residuals, constraints.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "models.hpp"

namespace omh {

struct RunOptions {
  std::uint64_t seed = 12345;
  int samples = 100;
  std::map<std::string, double> tol;  // overrides keyed by tolerance class
  int threads = 1;
};

struct CheckOutcome {
  std::string name;    // path, e.g. "torsion/K1"
  std::string klass;   // tolerance class, e.g. "torsion"
  std::string anchor;  // one-line statement of the certified identity
  bool passed = false;
  double worst = 0.0;  // max residual (constraints: the margin instead)
  double mean = 0.0;   // mean residual over the samples
  double tol = 0.0;
  int samples = 0;
  std::string note;
};

struct Report {
  std::string model_id;
  std::string title;
  std::string gauge;
  bool degenerate = false;
  std::map<std::string, double> params;
  std::vector<std::pair<std::string, std::string>> functions;  // slot, source
  RunOptions options;
  std::vector<CheckOutcome> checks;
  bool passed = false;
};

const std::map<std::string, double>& default_tolerances();

// 64-bit FNV-1a; each check draws from seed ^ fnv1a(check name), so results
// do not depend on check order or thread count
std::uint64_t fnv1a(const std::string& s);

Report verify_model(const ModelSpec& m, const RunOptions& opt);

// JSON text; the timestamp field is appended only when `stamp` is nonempty,
// so reports are byte-identical apart from it
std::string report_json(const Report& r, const std::string& stamp);

}  // namespace omh
