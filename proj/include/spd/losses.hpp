#pragma once

// Dice, focal, weighted saliency, pairwise slice consistency and the batch
// total objective, each returning its value together with the exact
// gradient with respect to the prediction map(s). Accumulation is done in
// double precision throughout.

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spd/volcore.hpp"

namespace spd {

struct LossWeights {
  double lambda_dice = 0.7;
  double lambda_focal = 0.3;
  double lambda_psc = 0.1;
  double gamma = 2.0;
  double epsilon = 1e-6;

  void validate() const;
};

struct LossValueAndGrad {
  double value = 0.0;
  int width = 0;
  int height = 0;
  std::vector<double> grad;  // d(value)/d(prediction), row-major
};

// Both-maps gradient result of psc_loss.
struct PairLossValueAndGrad {
  double value = 0.0;
  int width = 0;
  int height = 0;
  std::vector<double> grad_first;
  std::vector<double> grad_second;
};

// 1 - (2 sum(S G) + eps) / (sum S + sum G + eps).
// With eps = 0 and both inputs empty the ratio is 0/0; that case is
// defined as value 0 with zero gradient.
LossValueAndGrad dice_loss(const ProbMap& pred, const BinaryMask& gt, double epsilon);

// -(1/N) sum[G (1-S)^g log(S+eps) + (1-G) S^g log(1-S+eps)].
LossValueAndGrad focal_loss(const ProbMap& pred, const BinaryMask& gt, double gamma, double epsilon);

// lambda_dice * dice + lambda_focal * focal for one slice.
LossValueAndGrad saliency_loss(const ProbMap& pred, const BinaryMask& gt, const LossWeights& w);

// 1 - 2 sum(A B) / (sum A + sum B); both all-zero yields 0.
PairLossValueAndGrad psc_loss(const ProbMap& m_t, const ProbMap& m_next);

enum class PscMode { None, Next, Prev, Bidirectional };

PscMode parse_psc_mode(const std::string& name);
std::string to_string(PscMode mode);

// (slice, partner) pairs over a run of `count` consecutive slices.
std::vector<std::pair<int, int>> make_pairing(int count, PscMode mode);

struct BatchLoss {
  double value = 0.0;
  std::vector<std::vector<double>> grads;  // one per slice
};

// (1/|B|) sum_t [L_seg(M_t, G_t) + lambda_psc * sum_{(t,u) in pairing} L_psc(M_t, M_u)].
// Every pair must reference two adjacent batch positions.
BatchLoss total_loss(std::span<const ProbMap> preds, std::span<const BinaryMask> gts,
                     std::span<const std::pair<int, int>> pairing, const LossWeights& w);

// Mean binary cross-entropy, no epsilon. Reference routine for the
// gamma = 0 focal degeneracy.
double binary_cross_entropy(const ProbMap& pred, const BinaryMask& gt);

// max_i |analytic_i - fd_i| / max(1e-8, |fd_i|) using central differences.
double max_relative_gradient_error(const std::function<double(std::span<const double>)>& f,
                                   std::span<const double> x, std::span<const double> analytic,
                                   double h);

// Convenience wrapper for losses parameterised by a single ProbMap.
double finite_difference_check(const std::function<LossValueAndGrad(const ProbMap&)>& loss,
                               const ProbMap& at, double h);

}  // namespace spd
