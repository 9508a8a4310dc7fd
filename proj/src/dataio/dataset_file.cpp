#include "sscl/dataio/dataset_file.hpp"

#include "sscl/error.hpp"
#include "sscl/numgrad/checkpoint.hpp"

#include <json.hpp>

namespace sscl::dataio {

using nlohmann::json;
using numgrad::Index;

namespace {
constexpr int kVersion = 1;
}

void save_encoded(const std::filesystem::path& path, const EncodedDataset& data) {
  const auto n = static_cast<Index>(data.samples.size());
  const auto w = static_cast<Index>(data.width());
  if (n == 0 || w == 0) throw Error(ErrorCode::EmptyDataset, "refusing to write an empty dataset");
  numgrad::Tensor features({n, w});
  numgrad::Tensor labels({n});
  for (Index i = 0; i < n; ++i) {
    const auto& s = data.samples[static_cast<std::size_t>(i)];
    if (s.features.size() != w) throw Error(ErrorCode::InvalidShape, "samples have differing widths");
    features.matrix().row(i) = s.features.transpose();
    labels.data()[i] = s.label ? *s.label : -1;
  }
  numgrad::Checkpoint ckpt;
  ckpt.metadata = json{{"format", "sscl-encoded-dataset"},
                       {"version", kVersion},
                       {"class_names", data.class_names},
                       {"schema_fingerprint", data.schema_fingerprint}}
                      .dump();
  ckpt.add("features", std::move(features));
  ckpt.add("labels", std::move(labels));
  numgrad::save_checkpoint(path, ckpt);
}

EncodedDataset load_encoded(const std::filesystem::path& path) {
  const numgrad::Checkpoint ckpt = numgrad::load_checkpoint(path);
  EncodedDataset out;
  try {
    const json meta = json::parse(ckpt.metadata);
    if (meta.value("format", "") != "sscl-encoded-dataset" || meta.at("version").get<int>() != kVersion) {
      throw Error(ErrorCode::Checkpoint, "'" + path.string() + "' is not an encoded dataset");
    }
    out.class_names = meta.at("class_names").get<std::vector<std::string>>();
    out.schema_fingerprint = meta.at("schema_fingerprint").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Checkpoint, std::string("bad dataset header: ") + e.what());
  }
  const auto& features = ckpt.at("features");
  const auto& labels = ckpt.at("labels");
  if (features.rank() != 2 || labels.size() != features.dim(0)) {
    throw Error(ErrorCode::Checkpoint, "inconsistent dataset tensors");
  }
  out.samples.reserve(static_cast<std::size_t>(features.dim(0)));
  for (Index i = 0; i < features.dim(0); ++i) {
    EncodedSample s;
    s.features = features.matrix().row(i).transpose();
    const double l = labels.data()[i];
    if (l >= 0) s.label = static_cast<int>(l);
    out.samples.push_back(std::move(s));
  }
  return out;
}

}  // namespace sscl::dataio
