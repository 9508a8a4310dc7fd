#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sscl::eval {

// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes = 0) : k_(classes), counts_(classes * classes, 0) {}

  std::size_t classes() const { return k_; }
  std::size_t at(std::size_t truth, std::size_t predicted) const { return counts_.at(truth * k_ + predicted); }
  std::size_t& at(std::size_t truth, std::size_t predicted) { return counts_.at(truth * k_ + predicted); }
  std::size_t total() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t k_;
  std::vector<std::size_t> counts_;
};

// Throws Error{InvalidLabel} for a value outside [0, classes) or differing
// lengths.
ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels, std::size_t classes);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

// Support-weighted averages; 0/0 is 0.
struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<ClassMetrics> per_class;
  std::vector<std::size_t> never_predicted;  // classes whose precision was 0/0
  ConfusionMatrix matrix;
};

// Throws Error{EmptyEvaluation} when the matrix is empty.
MetricsReport metrics(const ConfusionMatrix& cm);

double round4(double v);

// JSON object with values rounded to four decimals. `class_names` may be empty.
std::string to_json(const MetricsReport& report, const std::vector<std::string>& class_names);

}  // namespace sscl::eval
