#include "ppi/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace ppi {

void Confusion::add(Label truth, Label predicted) {
  const bool pos = truth == Label::interaction;
  const bool hit = predicted == Label::interaction;
  if (pos && hit)
    ++tp;
  else if (!pos && hit)
    ++fp;
  else if (pos && !hit)
    ++fn;
  else
    ++tn;
}

Confusion& Confusion::operator+=(const Confusion& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
  return *this;
}

double precision(const Confusion& c) {
  const int64_t den = c.tp + c.fp;
  return den == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(den);
}

double recall(const Confusion& c) {
  const int64_t den = c.tp + c.fn;
  return den == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(den);
}

double f1(const Confusion& c) {
  const double p = precision(c), r = recall(c);
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

double accuracy(const Confusion& c) {
  const int64_t n = c.total();
  return n == 0 ? 0.0 : static_cast<double>(c.tp + c.tn) / static_cast<double>(n);
}

MetricsRow metrics_row(const std::string& fold, const Confusion& c) {
  return MetricsRow{fold, precision(c), recall(c), f1(c), c};
}

MetricsRow mean_row(const std::vector<MetricsRow>& folds) {
  if (folds.empty()) throw std::invalid_argument("mean_row: no folds");
  MetricsRow out;
  out.fold = "mean";
  for (const auto& r : folds) {
    out.precision += r.precision;
    out.recall += r.recall;
    out.f1 += r.f1;
    out.counts += r.counts;
  }
  const double k = static_cast<double>(folds.size());
  out.precision /= k;
  out.recall /= k;
  out.f1 /= k;
  return out;
}

MetricsRow micro_row(const std::vector<MetricsRow>& folds) {
  if (folds.empty()) throw std::invalid_argument("micro_row: no folds");
  Confusion pooled;
  for (const auto& r : folds) pooled += r.counts;
  return metrics_row("micro", pooled);
}

std::string format_metric(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("metrics: cannot open " + path + " for writing");
  out << "fold,precision,recall,f1,tp,fp,fn,tn\n";
  for (const auto& r : rows) {
    out << r.fold << ',' << format_metric(r.precision) << ',' << format_metric(r.recall)
        << ',' << format_metric(r.f1) << ',' << r.counts.tp << ',' << r.counts.fp << ','
        << r.counts.fn << ',' << r.counts.tn << '\n';
  }
  if (!out) throw std::runtime_error("metrics: write failed for " + path);
}

void write_confusion_csv(const std::string& path, const Confusion& c) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("metrics: cannot open " + path + " for writing");
  out << ",pred_non_interaction,pred_interaction\n";
  out << "true_non_interaction," << c.tn << ',' << c.fp << '\n';
  out << "true_interaction," << c.fn << ',' << c.tp << '\n';
  if (!out) throw std::runtime_error("metrics: write failed for " + path);
}

std::string render_confusion(const Confusion& c) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "                     pred non-int  pred int\n"
                "true non-interaction %12lld  %8lld\n"
                "true interaction     %12lld  %8lld\n",
                static_cast<long long>(c.tn), static_cast<long long>(c.fp),
                static_cast<long long>(c.fn), static_cast<long long>(c.tp));
  return buf;
}

}  // namespace ppi
