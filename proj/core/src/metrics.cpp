#include "leap/train/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "leap/errors.hpp"

namespace leap::train {

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size() || scores.empty())
    throw ConfigError("roc_auc: size mismatch or empty input");
  std::size_t positives = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw LabelError("roc_auc expects binary labels");
    positives += static_cast<std::size_t>(y);
  }
  const std::size_t negatives = scores.size() - positives;
  if (positives == 0 || negatives == 0) return 0.5;

  // Average ranks over tied scores, then U = rank-sum of positives.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::vector<double> rank(scores.size(), 0.0);
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t q = i; q <= j; ++q) rank[order[q]] = avg;
    i = j + 1;
  }
  double rank_sum = 0.0;
  for (std::size_t q = 0; q < scores.size(); ++q)
    if (labels[q] == 1) rank_sum += rank[q];
  const double n1 = static_cast<double>(positives);
  const double n0 = static_cast<double>(negatives);
  const double u = rank_sum - n1 * (n1 + 1.0) / 2.0;
  return u / (n1 * n0);
}

double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels) {
  if (predictions.size() != labels.size() || predictions.empty())
    throw ConfigError("accuracy: size mismatch or empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (predictions[i] == labels[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double macro_f1(const std::vector<int>& predictions, const std::vector<int>& labels,
                std::size_t num_classes) {
  if (predictions.size() != labels.size() || predictions.empty())
    throw ConfigError("macro_f1: size mismatch or empty input");
  if (num_classes == 0) throw ConfigError("macro_f1: need at least one class");
  double total = 0.0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const bool pred_c = predictions[i] == static_cast<int>(c);
      const bool true_c = labels[i] == static_cast<int>(c);
      tp += pred_c && true_c;
      fp += pred_c && !true_c;
      fn += !pred_c && true_c;
    }
    const double denom = static_cast<double>(2 * tp + fp + fn);
    total += denom > 0.0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
  }
  return total / static_cast<double>(num_classes);
}

Aggregate aggregate(const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("aggregate: empty input");
  // Summing in sorted order makes the result exactly invariant to the order
  // the per-seed records arrive in.
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  Aggregate out;
  out.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) /
             static_cast<double>(sorted.size());
  double var = 0.0;
  for (double v : sorted) var += (v - out.mean) * (v - out.mean);
  out.stddev = std::sqrt(var / static_cast<double>(sorted.size()));
  return out;
}

}  // namespace leap::train
