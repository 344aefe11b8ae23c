#include "geofair/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace geofair {

namespace {

constexpr char kMagic[] = "GEOFAIR-MLP";
constexpr std::size_t kMagicLen = 11;
constexpr std::uint32_t kFormatVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 8;
    return std::bit_cast<double>(v);
  }

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }

  std::string_view raw(std::size_t n) {
    need(n);
    std::string_view out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw ValidationError("checkpoint truncated");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string model_to_bytes(const MlpModel& model) {
  model.config.validate();
  std::string out;
  out.append(kMagic, kMagicLen);
  put_u32(out, kFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(model.config.input_dim));
  put_u32(out, static_cast<std::uint32_t>(model.config.hidden_dims.size()));
  for (std::size_t h : model.config.hidden_dims) {
    put_u32(out, static_cast<std::uint32_t>(h));
  }
  put_u32(out, static_cast<std::uint32_t>(model.config.output_dim));
  put_f64(out, model.config.dropout_prob);
  for (std::size_t h = 0; h < model.config.hidden_dims.size(); ++h) {
    out.push_back(model.config.relu_at(h) ? 1 : 0);
  }
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    for (double v : model.weights[l].storage()) put_f64(out, v);
    for (double v : model.biases[l]) put_f64(out, v);
  }
  return out;
}

MlpModel model_from_bytes(std::string_view bytes) {
  Reader reader(bytes);
  if (reader.raw(kMagicLen) != std::string_view(kMagic, kMagicLen)) {
    throw ValidationError("not a model checkpoint (bad magic)");
  }
  const std::uint32_t version = reader.u32();
  if (version != kFormatVersion) {
    throw ValidationError("unsupported checkpoint format version " +
                          std::to_string(version));
  }

  MlpConfig config;
  config.input_dim = reader.u32();
  const std::uint32_t hidden_count = reader.u32();
  if (hidden_count > 1024) throw ValidationError("implausible hidden layer count");
  config.hidden_dims.clear();
  for (std::uint32_t h = 0; h < hidden_count; ++h) config.hidden_dims.push_back(reader.u32());
  config.output_dim = reader.u32();
  config.dropout_prob = reader.f64();
  config.use_relu.clear();
  for (std::uint32_t h = 0; h < hidden_count; ++h) config.use_relu.push_back(reader.u8());
  config.validate();

  MlpModel model;
  model.config = config;
  for (std::size_t l = 0; l < config.layer_count(); ++l) {
    Matrix w(config.layer_in(l), config.layer_out(l));
    for (double& v : w.storage()) {
      v = reader.f64();
      if (!std::isfinite(v)) throw ValidationError("non-finite weight in checkpoint");
    }
    model.weights.push_back(std::move(w));
    std::vector<double> bias(config.layer_out(l));
    for (double& v : bias) {
      v = reader.f64();
      if (!std::isfinite(v)) throw ValidationError("non-finite bias in checkpoint");
    }
    model.biases.push_back(std::move(bias));
  }
  if (!reader.done()) throw ValidationError("trailing bytes in checkpoint");
  return model;
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint '" + path.string() + "'");
  const std::string bytes = model_to_bytes(model);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing checkpoint '" + path.string() + "'");
}

MlpModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_bytes(buf.str());
}

}  // namespace geofair
