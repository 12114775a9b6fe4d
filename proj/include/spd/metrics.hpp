#pragma once

// Region and boundary metrics with the empty-mask policy:
//   both empty      -> region metrics 1.0 (true negative), boundary metrics undefined
//   exactly one empty -> region metrics 0.0, boundary metrics undefined
// Boundary distances are Euclidean in in-plane spacing units between
// 4-connected boundary pixel sets. HD95 uses linear interpolation between
// order statistics at zero-based rank 0.95 * (m - 1).

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "spd/volcore.hpp"

namespace spd {

struct PlanarSpacing {
  double x = 1.0;
  double y = 1.0;
};

double dsc(const BinaryMask& pred, const BinaryMask& gt);
double iou(const BinaryMask& pred, const BinaryMask& gt);

// Distance from each boundary pixel of `from` to the nearest boundary
// pixel of `to`, in the row-major order of extract_boundary(from).
std::vector<double> directed_boundary_distances(const BinaryMask& from, const BinaryMask& to,
                                                PlanarSpacing spacing);

// Linear-interpolation percentile, q in [0,1]. Sorts a copy.
double percentile(std::vector<double> values, double q);

// Undefined (nullopt) unless both masks are non-empty.
std::optional<double> hd95(const BinaryMask& pred, const BinaryMask& gt, PlanarSpacing spacing = {});
std::optional<double> asd(const BinaryMask& pred, const BinaryMask& gt, PlanarSpacing spacing = {});

double volumetric_dice(std::span<const BinaryMask> pred, std::span<const BinaryMask> gt);

struct CaseMetrics {
  double dsc = 0.0;
  double iou = 0.0;
  std::optional<double> hd95;
  std::optional<double> asd;
  bool boundary_valid = false;
  bool empty_gt = false;
  bool empty_pred = false;
};

CaseMetrics evaluate_case(const BinaryMask& pred, const BinaryMask& gt, PlanarSpacing spacing = {});

struct MetricStats {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  int count = 0;     // cases where the metric is defined
};

struct NamedCase {
  std::string id;
  CaseMetrics metrics;
};

struct AggregateReport {
  MetricStats dsc, iou, hd95, asd;
  int cases = 0;
  int empty_gt = 0;
  int empty_pred = 0;
  int boundary_valid = 0;
  std::map<std::string, double> volumetric_dice;
};

// Deterministic fold in case-id order; undefined entries are skipped.
AggregateReport aggregate(std::vector<NamedCase> cases,
                          const std::map<std::string, double>& volumetric = {});

std::string cases_to_csv(std::vector<NamedCase> cases);
nlohmann::ordered_json report_to_json(const AggregateReport& report);

}  // namespace spd
