#pragma once

#include <cstddef>
#include <vector>

namespace leap::train {

// Mann-Whitney ROC-AUC with ties counted as half credit. Returns 0.5 when a
// class is absent (uninformative split).
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels);

// Mean over all classes of F1; a class with no true and no predicted members
// contributes 0.
double macro_f1(const std::vector<int>& predictions, const std::vector<int>& labels,
                std::size_t num_classes);

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;  // population convention: a single sample has stddev 0
};

Aggregate aggregate(const std::vector<double>& values);

}  // namespace leap::train
