#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ppi/corpus.hpp"

namespace ppi {

// 2x2 confusion counts with `interaction` as the positive class.
struct Confusion {
  int64_t tp = 0, fp = 0, fn = 0, tn = 0;

  void add(Label truth, Label predicted);
  int64_t total() const { return tp + fp + fn + tn; }
  Confusion& operator+=(const Confusion& o);
};

// All three return 0 when their denominator is 0.
double precision(const Confusion& c);
double recall(const Confusion& c);
double f1(const Confusion& c);
double accuracy(const Confusion& c);

struct MetricsRow {
  std::string fold;  // "0".."k-1", "mean", "micro"
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  Confusion counts;
};

MetricsRow metrics_row(const std::string& fold, const Confusion& c);
// Unweighted mean of per-fold precision/recall/f1; counts are pooled sums.
MetricsRow mean_row(const std::vector<MetricsRow>& folds);
// Precision/recall/f1 recomputed from the pooled counts.
MetricsRow micro_row(const std::vector<MetricsRow>& folds);

// Fixed six-decimal formatting so identical runs produce identical bytes.
std::string format_metric(double v);

// Header `fold,precision,recall,f1,tp,fp,fn,tn`, one row per entry.
void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows);
void write_confusion_csv(const std::string& path, const Confusion& c);
std::string render_confusion(const Confusion& c);

}  // namespace ppi
