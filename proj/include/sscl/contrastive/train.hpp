#pragma once

#include "sscl/augment/masking.hpp"
#include "sscl/dataio/preprocess.hpp"
#include "sscl/model/network.hpp"
#include "sscl/numgrad/optim.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sscl::contrastive {

using model::RowMatrix;

struct ContrastiveConfig {
  std::size_t batch_size = 32;
  double temperature = 0.5;
  std::size_t epochs = 100;
  augment::MaskingConfig masking;  // masking.seed drives the augmentation streams
  numgrad::AdamWOptions optimizer;
  numgrad::LrSchedule schedule;
  std::uint64_t seed = 0;  // batch order

  void validate() const;  // throws Error{Config}
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  double learning_rate = 0.0;
  std::optional<double> held_out_loss;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Shuffle, batch, mask two views per sample, forward both through e and g,
// NT-Xent, backward, AdamW; learning rate decays once per epoch. A trailing
// partial batch is dropped. Labels are ignored. Held-out samples, when given,
// get an eval-mode contrastive loss after every epoch.
// Throws Error{InsufficientData} if samples cannot fill one batch.
std::vector<EpochRecord> pretrain(model::ContrastiveModel& model, const dataio::Dataset& samples,
                                  const ContrastiveConfig& config, const dataio::Dataset* held_out = nullptr,
                                  const EpochCallback& on_epoch = {});

// Mean eval-mode loss over the full batches of `samples`, masked with the
// stream seeded by `seed`. Returns nullopt when there is no full batch.
std::optional<double> evaluate_contrastive_loss(const model::ContrastiveModel& model, const dataio::Dataset& samples,
                                                const ContrastiveConfig& config, std::uint64_t seed);

enum class Representation { Hidden, Context };

std::string to_string(Representation r);
Representation parse_representation(const std::string& text);  // "hidden" | "context"

struct HeadConfig {
  Representation representation = Representation::Hidden;
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  numgrad::AdamWOptions optimizer;
  numgrad::LrSchedule schedule;
  std::uint64_t seed = 0;

  void validate() const;
};

// Frozen eval-mode features, one row per sample.
RowMatrix represent(const model::ContrastiveModel& model, const dataio::Dataset& samples, Representation r);

struct HeadResult {
  model::ClassificationHead head;
  std::vector<EpochRecord> history;  // mean training cross-entropy per epoch
};

// Softmax classifier on fixed features. Throws Error{InvalidLabel} for a label
// outside [0, num_classes) and Error{EmptyDataset} for no rows.
HeadResult train_head_on_features(const RowMatrix& features, std::span<const int> labels, std::size_t num_classes,
                                  const HeadConfig& config);

// The encoder and projection are only read. Throws Error{MissingLabel} if a
// sample has no label.
HeadResult train_head(const model::ContrastiveModel& model, const dataio::Dataset& samples, std::size_t num_classes,
                      const HeadConfig& config);

std::vector<int> predict(const model::ClassificationHead& head, const RowMatrix& features);
std::vector<int> predict(const model::ContrastiveModel& model, const model::ClassificationHead& head,
                         Representation r, const dataio::Dataset& samples);

// Labels of a fully labeled dataset; throws Error{MissingLabel} otherwise.
std::vector<int> require_labels(const dataio::Dataset& samples);

}  // namespace sscl::contrastive
