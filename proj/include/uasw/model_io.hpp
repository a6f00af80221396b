// Versioned flat binary model file. Byte layout (all integers u32, all reals
// f32, little-endian):
//
//   "UASWMLP1"                         8-byte magic
//   input_dim                          15
//   trunk_count, width[trunk_count]    hidden layer widths
//   head_count, size[head_count]       3, then 4 2 2
//   per layer (trunk first, then heads in order):
//     weights[out * in] row-major, bias[out]
//   scaler mean[input_dim], scaler scale[input_dim]
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <string_view>

#include "uasw/classifier.hpp"

namespace uasw {

inline constexpr std::string_view kModelMagic = "UASWMLP1";

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f32(std::string& out, double v) {
  put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f32() { return static_cast<double>(std::bit_cast<float>(u32())); }
  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  [[nodiscard]] bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError("model file truncated");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string encode_model(const MlpModel& model) {
  std::string out(kModelMagic);
  detail::put_u32(out, kRangeBins);
  const auto topo = model.topology();
  detail::put_u32(out, static_cast<std::uint32_t>(topo.hidden.size()));
  for (int w : topo.hidden) detail::put_u32(out, static_cast<std::uint32_t>(w));
  detail::put_u32(out, kHeadCount);
  for (int s : kHeadSizes) detail::put_u32(out, static_cast<std::uint32_t>(s));
  for (const auto& layer : model.layers()) {
    for (double w : layer.weights) detail::put_f32(out, w);
    for (double b : layer.bias) detail::put_f32(out, b);
  }
  for (double m : model.scaler.mean) detail::put_f32(out, m);
  for (double s : model.scaler.scale) detail::put_f32(out, s);
  return out;
}

inline MlpModel decode_model(std::string_view bytes) {
  detail::ByteReader in(bytes);
  if (in.take(kModelMagic.size()) != kModelMagic) throw FormatError("bad model magic");
  if (in.u32() != static_cast<std::uint32_t>(kRangeBins))
    throw FormatError("model input dimension mismatch");
  const auto trunk = in.u32();
  if (trunk > 64) throw FormatError("implausible trunk depth");
  Topology topo;
  topo.hidden.clear();
  for (std::uint32_t i = 0; i < trunk; ++i) {
    const auto w = in.u32();
    if (w == 0 || w > 4096) throw FormatError("implausible hidden width");
    topo.hidden.push_back(static_cast<int>(w));
  }
  if (in.u32() != static_cast<std::uint32_t>(kHeadCount)) throw FormatError("head count mismatch");
  for (int s : kHeadSizes)
    if (in.u32() != static_cast<std::uint32_t>(s)) throw FormatError("head size mismatch");

  MlpModel model(topo);
  for (auto& layer : model.layers()) {
    for (auto& w : layer.weights) w = in.f32();
    for (auto& b : layer.bias) b = in.f32();
  }
  for (auto& m : model.scaler.mean) m = in.f32();
  for (auto& s : model.scaler.scale) s = in.f32();
  if (!in.done()) throw FormatError("trailing bytes after model");
  return model;
}

inline void save_model(const std::string& path, const MlpModel& model) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path + " for writing");
  const auto bytes = encode_model(model);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error("failed writing " + path);
}

inline MlpModel load_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_model(bytes);
}

}  // namespace uasw
