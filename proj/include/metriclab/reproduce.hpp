#pragma once

#include <functional>
#include <string>
#include <vector>

#include "metriclab/entropic.hpp"

namespace metriclab {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::vector<std::string> details;  // one line per sub-check
  double seconds = 0;
};

struct ReproduceOptions {
  std::size_t workers = 1;
  /// Directory for LP certificate sidecars; empty to skip writing them.
  std::string sidecar_dir;
  std::function<void(const CriterionResult&)> on_result;
};

inline constexpr int kCriterionCount = 10;

/// K33 with the edge (0, 3) removed, so d(0, 3) = 3.
FiniteMetric k33_minus_edge_metric();

CriterionResult run_criterion(int id, const ReproduceOptions& opt = {});
std::vector<CriterionResult> reproduce_suite(const ReproduceOptions& opt = {});

}  // namespace metriclab
