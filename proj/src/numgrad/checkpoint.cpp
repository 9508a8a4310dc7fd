#include "sscl/numgrad/checkpoint.hpp"

#include "sscl/error.hpp"
#include "sscl/io.hpp"

#include <bit>
#include <cstring>

namespace sscl::numgrad {

namespace {

constexpr char kMagic[8] = {'S', 'S', 'C', 'L', 'C', 'K', 'P', 'T'};

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xffU));
  }
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get_le() {
    need(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }

  std::string get_bytes(std::uint64_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::uint64_t n) const {
    if (n > bytes_.size() - pos_) throw Error(ErrorCode::Checkpoint, "truncated checkpoint");
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

const Tensor& Checkpoint::at(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return t;
  }
  throw Error(ErrorCode::Checkpoint, "checkpoint has no tensor named '" + name + "'");
}

bool Checkpoint::contains(const std::string& name) const {
  for (const auto& entry : tensors) {
    if (entry.first == name) return true;
  }
  return false;
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  std::string out(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, Checkpoint::kVersion);
  put_le<std::uint64_t>(out, ckpt.metadata.size());
  out += ckpt.metadata;
  put_le<std::uint64_t>(out, ckpt.tensors.size());
  for (const auto& [name, t] : ckpt.tensors) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (const Index d : t.shape()) put_le<std::uint64_t>(out, static_cast<std::uint64_t>(d));
    for (Index i = 0; i < t.size(); ++i) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(t.data()[i]));
  }
  return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorCode::Checkpoint, "not a checkpoint file (bad magic)");
  }
  Reader r(bytes);
  r.get_bytes(sizeof(kMagic));
  const auto version = r.get_le<std::uint32_t>();
  if (version != Checkpoint::kVersion) {
    throw Error(ErrorCode::Checkpoint, "unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.metadata = r.get_bytes(r.get_le<std::uint64_t>());
  const auto count = r.get_le<std::uint64_t>();
  for (std::uint64_t k = 0; k < count; ++k) {
    std::string name = r.get_bytes(r.get_le<std::uint32_t>());
    const auto rank = r.get_le<std::uint32_t>();
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<Index>(r.get_le<std::uint64_t>());
    Vector data(element_count(shape));
    for (Index i = 0; i < data.size(); ++i) data[i] = std::bit_cast<double>(r.get_le<std::uint64_t>());
    ckpt.add(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  if (!r.at_end()) throw Error(ErrorCode::Checkpoint, "trailing bytes after checkpoint payload");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_file_atomic(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(read_file(path));
}

}  // namespace sscl::numgrad
