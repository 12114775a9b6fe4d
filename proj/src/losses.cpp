#include "spd/losses.hpp"

#include <algorithm>
#include <cmath>

namespace spd {

namespace {

void require_finite(const std::vector<double>& grad, const char* what) {
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad[i])) {
      throw NumericalError(std::string(what) + ": non-finite gradient at pixel " + std::to_string(i));
    }
  }
}

// d/db of b^g, with the g = 0 case pinned to 0 so that 0 * 0^-1 never
// produces NaN.
double dpow(double base, double gamma) {
  if (gamma == 0.0) return 0.0;
  return gamma * std::pow(base, gamma - 1.0);
}

}  // namespace

void LossWeights::validate() const {
  if (lambda_dice < 0 || lambda_focal < 0 || lambda_psc < 0 || gamma < 0) {
    throw ValidationError("loss weights and gamma must be non-negative");
  }
  if (!(epsilon > 0)) throw ValidationError("loss epsilon must be positive");
}

LossValueAndGrad dice_loss(const ProbMap& pred, const BinaryMask& gt, double epsilon) {
  require_same_shape(pred, gt, "dice_loss");
  double inter = 0.0, sum_s = 0.0, sum_g = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    inter += pred[i] * gt[i];
    sum_s += pred[i];
    sum_g += gt[i];
  }
  LossValueAndGrad out{0.0, pred.width(), pred.height(), std::vector<double>(pred.size(), 0.0)};
  const double num = 2.0 * inter + epsilon;
  const double den = sum_s + sum_g + epsilon;
  if (den == 0.0) return out;
  out.value = 1.0 - num / den;
  const double inv_den2 = 1.0 / (den * den);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    out.grad[i] = -(2.0 * gt[i] * den - num) * inv_den2;
  }
  require_finite(out.grad, "dice_loss");
  return out;
}

LossValueAndGrad focal_loss(const ProbMap& pred, const BinaryMask& gt, double gamma, double epsilon) {
  require_same_shape(pred, gt, "focal_loss");
  if (pred.empty()) throw DimensionError("focal_loss: empty prediction");
  const double inv_n = 1.0 / static_cast<double>(pred.size());
  LossValueAndGrad out{0.0, pred.width(), pred.height(), std::vector<double>(pred.size(), 0.0)};
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double s = pred[i];
    double term, dterm;
    if (gt[i]) {
      const double q = 1.0 - s;
      const double lg = std::log(s + epsilon);
      term = std::pow(q, gamma) * lg;
      dterm = -dpow(q, gamma) * lg + std::pow(q, gamma) / (s + epsilon);
    } else {
      const double lg = std::log(1.0 - s + epsilon);
      term = std::pow(s, gamma) * lg;
      dterm = dpow(s, gamma) * lg - std::pow(s, gamma) / (1.0 - s + epsilon);
    }
    acc += term;
    out.grad[i] = -inv_n * dterm;
  }
  out.value = -inv_n * acc;
  require_finite(out.grad, "focal_loss");
  return out;
}

LossValueAndGrad saliency_loss(const ProbMap& pred, const BinaryMask& gt, const LossWeights& w) {
  require_same_shape(pred, gt, "saliency_loss");
  LossValueAndGrad out{0.0, pred.width(), pred.height(), std::vector<double>(pred.size(), 0.0)};
  if (w.lambda_dice != 0.0) {
    const auto d = dice_loss(pred, gt, w.epsilon);
    out.value += w.lambda_dice * d.value;
    for (std::size_t i = 0; i < out.grad.size(); ++i) out.grad[i] += w.lambda_dice * d.grad[i];
  }
  if (w.lambda_focal != 0.0) {
    const auto f = focal_loss(pred, gt, w.gamma, w.epsilon);
    out.value += w.lambda_focal * f.value;
    for (std::size_t i = 0; i < out.grad.size(); ++i) out.grad[i] += w.lambda_focal * f.grad[i];
  }
  return out;
}

PairLossValueAndGrad psc_loss(const ProbMap& m_t, const ProbMap& m_next) {
  require_same_shape(m_t, m_next, "psc_loss");
  double inter = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (std::size_t i = 0; i < m_t.size(); ++i) {
    inter += m_t[i] * m_next[i];
    sum_a += m_t[i];
    sum_b += m_next[i];
  }
  PairLossValueAndGrad out{0.0, m_t.width(), m_t.height(), std::vector<double>(m_t.size(), 0.0),
                           std::vector<double>(m_t.size(), 0.0)};
  const double den = sum_a + sum_b;
  if (den == 0.0) return out;
  out.value = 1.0 - 2.0 * inter / den;
  const double inv_den2 = 1.0 / (den * den);
  for (std::size_t i = 0; i < m_t.size(); ++i) {
    out.grad_first[i] = -2.0 * (m_next[i] * den - inter) * inv_den2;
    out.grad_second[i] = -2.0 * (m_t[i] * den - inter) * inv_den2;
  }
  require_finite(out.grad_first, "psc_loss");
  require_finite(out.grad_second, "psc_loss");
  return out;
}

PscMode parse_psc_mode(const std::string& name) {
  if (name == "none") return PscMode::None;
  if (name == "next") return PscMode::Next;
  if (name == "prev") return PscMode::Prev;
  if (name == "bidirectional" || name == "bi") return PscMode::Bidirectional;
  throw ValidationError("unknown PSC mode '" + name + "' (expected none, next, prev, bidirectional)");
}

std::string to_string(PscMode mode) {
  switch (mode) {
    case PscMode::None: return "none";
    case PscMode::Next: return "next";
    case PscMode::Prev: return "prev";
    case PscMode::Bidirectional: return "bidirectional";
  }
  return "none";
}

std::vector<std::pair<int, int>> make_pairing(int count, PscMode mode) {
  std::vector<std::pair<int, int>> pairs;
  for (int t = 0; t < count; ++t) {
    const bool has_next = t + 1 < count;
    const bool has_prev = t > 0;
    if ((mode == PscMode::Next || mode == PscMode::Bidirectional) && has_next) pairs.emplace_back(t, t + 1);
    if ((mode == PscMode::Prev || mode == PscMode::Bidirectional) && has_prev) pairs.emplace_back(t, t - 1);
  }
  return pairs;
}

BatchLoss total_loss(std::span<const ProbMap> preds, std::span<const BinaryMask> gts,
                     std::span<const std::pair<int, int>> pairing, const LossWeights& w) {
  if (preds.size() != gts.size()) {
    throw DimensionError("total_loss: " + std::to_string(preds.size()) + " predictions vs " +
                         std::to_string(gts.size()) + " ground-truth slices");
  }
  const int count = static_cast<int>(preds.size());
  for (const auto& [a, b] : pairing) {
    if (a < 0 || b < 0 || a >= count || b >= count || std::abs(a - b) != 1) {
      throw IndexError("total_loss: pair (" + std::to_string(a) + ", " + std::to_string(b) +
                       ") does not reference adjacent slices of a batch of " + std::to_string(count));
    }
  }
  BatchLoss out;
  if (count == 0) return out;
  const double inv_b = 1.0 / static_cast<double>(count);
  out.grads.resize(preds.size());
  for (int t = 0; t < count; ++t) {
    auto seg = saliency_loss(preds[t], gts[t], w);
    out.value += seg.value;
    out.grads[t] = std::move(seg.grad);
  }
  if (w.lambda_psc != 0.0) {
    for (const auto& [a, b] : pairing) {
      const auto psc = psc_loss(preds[a], preds[b]);
      out.value += w.lambda_psc * psc.value;
      for (std::size_t i = 0; i < psc.grad_first.size(); ++i) {
        out.grads[a][i] += w.lambda_psc * psc.grad_first[i];
        out.grads[b][i] += w.lambda_psc * psc.grad_second[i];
      }
    }
  }
  out.value *= inv_b;
  for (auto& g : out.grads) {
    for (auto& v : g) v *= inv_b;
  }
  return out;
}

double binary_cross_entropy(const ProbMap& pred, const BinaryMask& gt) {
  require_same_shape(pred, gt, "binary_cross_entropy");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    acc += gt[i] ? -std::log(pred[i]) : -std::log(1.0 - pred[i]);
  }
  return acc / static_cast<double>(pred.size());
}

double max_relative_gradient_error(const std::function<double(std::span<const double>)>& f,
                                   std::span<const double> x, std::span<const double> analytic,
                                   double h) {
  if (x.size() != analytic.size()) {
    throw DimensionError("finite difference check: point and gradient sizes differ");
  }
  std::vector<double> probe(x.begin(), x.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double up = f(probe);
    probe[i] = orig - h;
    const double down = f(probe);
    probe[i] = orig;
    const double fd = (up - down) / (2.0 * h);
    worst = std::max(worst, std::abs(analytic[i] - fd) / std::max(1e-8, std::abs(fd)));
  }
  return worst;
}

double finite_difference_check(const std::function<LossValueAndGrad(const ProbMap&)>& loss,
                               const ProbMap& at, double h) {
  const auto analytic = loss(at);
  const int w = at.width(), hgt = at.height();
  auto f = [&](std::span<const double> v) {
    return loss(ProbMap(w, hgt, std::vector<double>(v.begin(), v.end()))).value;
  };
  return max_relative_gradient_error(f, at.values(), analytic.grad, h);
}

}  // namespace spd
