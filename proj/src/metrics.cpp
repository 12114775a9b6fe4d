#include "spd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "spd/distance.hpp"

namespace spd {

namespace {

struct Overlap {
  std::size_t inter = 0;
  std::size_t pred = 0;
  std::size_t gt = 0;
};

Overlap overlap(const BinaryMask& pred, const BinaryMask& gt, const char* what) {
  require_same_shape(pred, gt, what);
  Overlap o;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    o.inter += pred[i] & gt[i];
    o.pred += pred[i];
    o.gt += gt[i];
  }
  return o;
}

double sorted_percentile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw ValidationError("percentile of an empty set");
  const double rank = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = static_cast<std::size_t>(std::ceil(rank));
  const double frac = rank - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

MetricStats stats(const std::vector<double>& v) {
  MetricStats s;
  s.count = static_cast<int>(v.size());
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(v.size()));
  return s;
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double dsc(const BinaryMask& pred, const BinaryMask& gt) {
  const auto o = overlap(pred, gt, "dsc");
  if (o.pred == 0 && o.gt == 0) return 1.0;
  return 2.0 * static_cast<double>(o.inter) / static_cast<double>(o.pred + o.gt);
}

double iou(const BinaryMask& pred, const BinaryMask& gt) {
  const auto o = overlap(pred, gt, "iou");
  if (o.pred == 0 && o.gt == 0) return 1.0;
  return static_cast<double>(o.inter) / static_cast<double>(o.pred + o.gt - o.inter);
}

std::vector<double> directed_boundary_distances(const BinaryMask& from, const BinaryMask& to,
                                                PlanarSpacing spacing) {
  require_same_shape(from, to, "boundary distance");
  const auto from_boundary = extract_boundary(from);
  const auto to_boundary = extract_boundary(to);
  std::vector<std::uint8_t> feature(to.size(), 0);
  for (const auto& p : to_boundary) feature[to.index(p.x, p.y)] = 1;
  const auto d2 = squared_distance_transform(BinaryMask(to.width(), to.height(), std::move(feature)),
                                             spacing.x, spacing.y);
  std::vector<double> out;
  out.reserve(from_boundary.size());
  for (const auto& p : from_boundary) out.push_back(std::sqrt(d2[from.index(p.x, p.y)]));
  return out;
}

double percentile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  return sorted_percentile(values, q);
}

std::optional<double> hd95(const BinaryMask& pred, const BinaryMask& gt, PlanarSpacing spacing) {
  require_same_shape(pred, gt, "hd95");
  if (!pred.any() || !gt.any()) return std::nullopt;
  const double a = percentile(directed_boundary_distances(pred, gt, spacing), 0.95);
  const double b = percentile(directed_boundary_distances(gt, pred, spacing), 0.95);
  return std::max(a, b);
}

std::optional<double> asd(const BinaryMask& pred, const BinaryMask& gt, PlanarSpacing spacing) {
  require_same_shape(pred, gt, "asd");
  if (!pred.any() || !gt.any()) return std::nullopt;
  const auto a = directed_boundary_distances(pred, gt, spacing);
  const auto b = directed_boundary_distances(gt, pred, spacing);
  double sum = 0.0;
  for (double d : a) sum += d;
  for (double d : b) sum += d;
  return sum / static_cast<double>(a.size() + b.size());
}

double volumetric_dice(std::span<const BinaryMask> pred, std::span<const BinaryMask> gt) {
  if (pred.size() != gt.size()) {
    throw DimensionError("volumetric_dice: " + std::to_string(pred.size()) + " vs " +
                         std::to_string(gt.size()) + " slices");
  }
  Overlap total;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    const auto o = overlap(pred[t], gt[t], "volumetric_dice");
    total.inter += o.inter;
    total.pred += o.pred;
    total.gt += o.gt;
  }
  if (total.pred == 0 && total.gt == 0) return 1.0;
  return 2.0 * static_cast<double>(total.inter) / static_cast<double>(total.pred + total.gt);
}

CaseMetrics evaluate_case(const BinaryMask& pred, const BinaryMask& gt, PlanarSpacing spacing) {
  CaseMetrics m;
  m.dsc = dsc(pred, gt);
  m.iou = iou(pred, gt);
  m.empty_pred = !pred.any();
  m.empty_gt = !gt.any();
  m.hd95 = hd95(pred, gt, spacing);
  m.asd = asd(pred, gt, spacing);
  m.boundary_valid = m.hd95.has_value();
  return m;
}

AggregateReport aggregate(std::vector<NamedCase> cases, const std::map<std::string, double>& volumetric) {
  std::stable_sort(cases.begin(), cases.end(), [](const NamedCase& a, const NamedCase& b) { return a.id < b.id; });
  std::vector<double> d, j, h, s;
  AggregateReport r;
  r.cases = static_cast<int>(cases.size());
  for (const auto& c : cases) {
    d.push_back(c.metrics.dsc);
    j.push_back(c.metrics.iou);
    if (c.metrics.hd95) h.push_back(*c.metrics.hd95);
    if (c.metrics.asd) s.push_back(*c.metrics.asd);
    r.empty_gt += c.metrics.empty_gt;
    r.empty_pred += c.metrics.empty_pred;
    r.boundary_valid += c.metrics.boundary_valid;
  }
  r.dsc = stats(d);
  r.iou = stats(j);
  r.hd95 = stats(h);
  r.asd = stats(s);
  r.volumetric_dice = volumetric;
  return r;
}

std::string cases_to_csv(std::vector<NamedCase> cases) {
  std::stable_sort(cases.begin(), cases.end(), [](const NamedCase& a, const NamedCase& b) { return a.id < b.id; });
  std::string out = "case_id,dsc,iou,hd95,asd,boundary_valid\n";
  for (const auto& c : cases) {
    out += c.id + "," + format_real(c.metrics.dsc) + "," + format_real(c.metrics.iou) + ",";
    out += (c.metrics.hd95 ? format_real(*c.metrics.hd95) : std::string()) + ",";
    out += (c.metrics.asd ? format_real(*c.metrics.asd) : std::string()) + ",";
    out += c.metrics.boundary_valid ? "1\n" : "0\n";
  }
  return out;
}

nlohmann::ordered_json report_to_json(const AggregateReport& report) {
  using nlohmann::ordered_json;
  auto stat = [](const MetricStats& s) {
    ordered_json j;
    j["mean"] = s.mean;
    j["std"] = s.std;
    j["count"] = s.count;
    return j;
  };
  ordered_json j;
  j["cases"] = report.cases;
  j["dsc"] = stat(report.dsc);
  j["iou"] = stat(report.iou);
  j["hd95"] = stat(report.hd95);
  j["asd"] = stat(report.asd);
  j["empty_gt"] = report.empty_gt;
  j["empty_pred"] = report.empty_pred;
  j["boundary_valid"] = report.boundary_valid;
  ordered_json vd = ordered_json::object();
  for (const auto& [id, v] : report.volumetric_dice) vd[id] = v;
  j["volumetric_dice"] = std::move(vd);
  return j;
}

}  // namespace spd
