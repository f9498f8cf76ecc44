#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "wkstab/invariants.hpp"
#include "wkstab/pbundle.hpp"
#include "wkstab/polytope.hpp"
#include "wkstab/testconfig.hpp"
#include "wkstab/weights.hpp"

namespace wkstab::jobs {

enum class Command {
  Slope,
  WExt,
  Futaki,
  Scan,
  Abreu,
  Df,
  PBundleSolve,
  PBundleFutaki,
  PBundleReport,
};

Command command_from_string(const std::string& name);
const char* to_string(Command cmd);

struct JobOptions {
  std::string pipeline = "float";  // float | exact | both
  int order = kDefaultOrder;
  int threads = 1;
};

struct Report {
  nlohmann::json body;
  std::string csv;  // populated for sweep commands
};

// Validates the config, dispatches to the owning module, and assembles the
// machine-readable report. Every numeric result carries its pipeline tag.
Report run(Command cmd, const nlohmann::json& config, const JobOptions& options);

// Config fragments, exposed for reuse and direct testing.
WeightExpr weight_from_json(const nlohmann::json& j, int dim);
PLConvex pl_from_json(const nlohmann::json& j, int dim);
AdmissibleData admissible_from_json(const nlohmann::json& j);
Rational rational_field(const nlohmann::json& j, const std::string& context);

}  // namespace wkstab::jobs
