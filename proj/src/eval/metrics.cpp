#include "sscl/eval/metrics.hpp"

#include "sscl/error.hpp"

#include <json.hpp>

#include <cmath>
#include <numeric>

namespace sscl::eval {

using nlohmann::ordered_json;

std::size_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0}); }

ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels, std::size_t classes) {
  if (predictions.size() != labels.size()) {
    throw Error(ErrorCode::InvalidLabel, std::to_string(predictions.size()) + " predictions for " +
                                             std::to_string(labels.size()) + " labels");
  }
  ConfusionMatrix cm(classes);
  auto check = [classes](int v, const char* what) {
    if (v < 0 || static_cast<std::size_t>(v) >= classes) {
      throw Error(ErrorCode::InvalidLabel, std::string(what) + " " + std::to_string(v) + " outside [0, " +
                                               std::to_string(classes) + ")");
    }
    return static_cast<std::size_t>(v);
  };
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ++cm.at(check(labels[i], "label"), check(predictions[i], "prediction"));
  }
  return cm;
}

namespace {

double ratio(std::size_t a, std::size_t b) { return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b); }

}  // namespace

MetricsReport metrics(const ConfusionMatrix& cm) {
  const std::size_t total = cm.total();
  if (total == 0) throw Error(ErrorCode::EmptyEvaluation, "confusion matrix is empty");
  const std::size_t k = cm.classes();
  MetricsReport r;
  r.matrix = cm;
  std::size_t correct = 0;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t support = 0, predicted = 0;
    for (std::size_t o = 0; o < k; ++o) {
      support += cm.at(c, o);
      predicted += cm.at(o, c);
    }
    const std::size_t tp = cm.at(c, c);
    correct += tp;
    ClassMetrics m;
    m.support = support;
    m.precision = ratio(tp, predicted);
    m.recall = ratio(tp, support);
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    if (predicted == 0) r.never_predicted.push_back(c);
    const double w = ratio(support, total);
    r.precision += w * m.precision;
    r.recall += w * m.recall;
    r.f1 += w * m.f1;
    r.per_class.push_back(m);
  }
  r.accuracy = ratio(correct, total);
  return r;
}

double round4(double v) { return std::round(v * 1e4) / 1e4; }

std::string to_json(const MetricsReport& report, const std::vector<std::string>& class_names) {
  auto name = [&](std::size_t c) { return c < class_names.size() ? class_names[c] : std::to_string(c); };
  ordered_json j;
  j["accuracy"] = round4(report.accuracy);
  j["precision"] = round4(report.precision);
  j["recall"] = round4(report.recall);
  j["f1"] = round4(report.f1);
  j["averaging"] = "weighted";
  j["samples"] = report.matrix.total();
  ordered_json per = ordered_json::array();
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    const auto& m = report.per_class[c];
    per.push_back({{"class", name(c)},
                   {"precision", round4(m.precision)},
                   {"recall", round4(m.recall)},
                   {"f1", round4(m.f1)},
                   {"support", m.support}});
  }
  j["per_class"] = per;
  ordered_json rows = ordered_json::array();
  for (std::size_t t = 0; t < report.matrix.classes(); ++t) {
    ordered_json row = ordered_json::array();
    for (std::size_t p = 0; p < report.matrix.classes(); ++p) row.push_back(report.matrix.at(t, p));
    rows.push_back(row);
  }
  j["confusion"] = rows;
  ordered_json never = ordered_json::array();
  for (const auto c : report.never_predicted) never.push_back(name(c));
  j["never_predicted"] = never;
  return j.dump(2);
}

}  // namespace sscl::eval
