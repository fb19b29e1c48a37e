#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "mebface/network.hpp"

namespace mebface {
namespace {

constexpr char kMagic[8] = {'M', 'E', 'B', 'N', 'E', 'T', '0', '1'};

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_f64(std::vector<unsigned char>& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  explicit Reader(std::span<const unsigned char> bytes) : bytes_(bytes) {}

  std::uint64_t u64() {
    if (remaining() < 8) throw FormatError("params: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t size() {
    const std::uint64_t v = u64();
    if (v > (std::uint64_t{1} << 32)) throw FormatError("params: implausible dimension");
    return static_cast<std::size_t>(v);
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t pos_ = 0;

 private:
  std::span<const unsigned char> bytes_;
};

}  // namespace

std::vector<unsigned char> encode_params(const NetworkParams& params) {
  std::vector<unsigned char> out(std::begin(kMagic), std::end(kMagic));
  const Architecture& a = params.arch;
  for (std::size_t v : {a.input_size, a.conv1_maps, a.conv1_filter, a.conv2_maps, a.conv2_filter,
                        a.fc1_units, a.fc2_units, a.code_bits}) {
    put_u64(out, v);
  }
  put_f64(out, a.dropout);
  put_u64(out, params.parameter_count());
  out.reserve(out.size() + 8 * params.parameter_count());
  params.for_each_buffer([&](std::span<const double> buffer) {
    for (double v : buffer) put_f64(out, v);
  });
  return out;
}

NetworkParams decode_params(std::span<const unsigned char> bytes) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw FormatError("params: bad magic (expected MEBNET01)");
  }
  Reader in(bytes);
  in.pos_ = sizeof(kMagic);
  Architecture a;
  a.input_size = in.size();
  a.conv1_maps = in.size();
  a.conv1_filter = in.size();
  a.conv2_maps = in.size();
  a.conv2_filter = in.size();
  a.fc1_units = in.size();
  a.fc2_units = in.size();
  a.code_bits = in.size();
  a.dropout = in.f64();
  NetworkParams params;
  try {
    params = NetworkParams::zeros(a);
  } catch (const ShapeError& e) {
    throw FormatError(std::string("params: invalid architecture: ") + e.what());
  }
  const std::uint64_t count = in.u64();
  if (count != params.parameter_count() || in.remaining() != 8 * count) {
    throw FormatError("params: parameter count does not match architecture or file size");
  }
  params.for_each_buffer([&](std::span<double> buffer) {
    for (double& v : buffer) v = in.f64();
  });
  return params;
}

void save_params(const NetworkParams& params, const std::filesystem::path& path) {
  const auto bytes = encode_params(params);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot write params: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

NetworkParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open params: " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  return decode_params(bytes);
}

}  // namespace mebface
