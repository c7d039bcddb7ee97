#pragma once

#include <span>
#include <vector>

namespace tiglab {

/// Average precision of positives ranked against negatives. The merged list is
/// positives then negatives; equal scores keep that input order.
double average_precision(std::span<const double> pos_scores, std::span<const double> neg_scores);

/// Probability that a random positive outscores a random negative, ties count one half.
double auroc(std::span<const double> scores, std::span<const int> labels);

/// Spearman rank correlation with average ranks for ties. Returns 0 when either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
  bool has_std = false;  // false for fewer than two samples
};

/// Sample mean and (n-1) standard deviation.
MeanStd mean_std(std::span<const double> values);

}  // namespace tiglab
