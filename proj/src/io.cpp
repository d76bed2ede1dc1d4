#include "slat/io.hpp"

#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace slat::io {
namespace {

struct Pnm {
  int magic = 0;  // 5 or 6
  Index height = 0;
  Index width = 0;
  std::string pixels;  // raw bytes
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Parses one whitespace-delimited header integer, skipping '#' comments.
long next_header_int(const std::string& bytes, std::size_t& pos, const std::string& name) {
  for (;;) {
    while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (pos < bytes.size() && bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  std::size_t start = pos;
  while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) ++pos;
  if (start == pos) throw ValidationError(name + ": malformed PNM header");
  return std::stol(bytes.substr(start, pos - start));
}

Pnm parse_pnm(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  const std::string name = path.string();
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
    throw ValidationError(name + ": not a binary PGM/PPM (P5/P6)");
  Pnm pnm;
  pnm.magic = bytes[1] - '0';
  std::size_t pos = 2;
  const long width = next_header_int(bytes, pos, name);
  const long height = next_header_int(bytes, pos, name);
  const long maxval = next_header_int(bytes, pos, name);
  if (width < 1 || height < 1) throw ValidationError(name + ": bad dimensions");
  if (maxval != 255) throw ValidationError(name + ": unsupported bit depth (maxval " +
                                           std::to_string(maxval) + ", need 255)");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
    throw ValidationError(name + ": malformed PNM header");
  ++pos;
  const std::size_t channels = pnm.magic == 6 ? 3 : 1;
  const std::size_t need = static_cast<std::size_t>(width * height) * channels;
  if (bytes.size() - pos < need) throw ValidationError(name + ": truncated pixel data");
  pnm.width = width;
  pnm.height = height;
  pnm.pixels = bytes.substr(pos, need);
  return pnm;
}

std::string pnm_header(int magic, Index width, Index height) {
  return "P" + std::to_string(magic) + "\n" + std::to_string(width) + " " +
         std::to_string(height) + "\n255\n";
}

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(const std::string& in, std::size_t& pos) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += sizeof(T);
  return static_cast<T>(v);
}

}  // namespace

std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5));
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw ValidationError("write failed for " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw ValidationError("cannot move temp file onto " + path.string());
  }
}

Image load_image(const std::filesystem::path& path) {
  const Pnm pnm = parse_pnm(path);
  const Index channels = pnm.magic == 6 ? 3 : 1;
  std::vector<PlaneXd> planes(static_cast<std::size_t>(channels), PlaneXd(pnm.height, pnm.width));
  for (Index i = 0; i < pnm.height * pnm.width; ++i)
    for (Index c = 0; c < channels; ++c)
      planes[static_cast<std::size_t>(c)].data()[i] =
          static_cast<unsigned char>(pnm.pixels[static_cast<std::size_t>(i * channels + c)]) /
          255.0;
  return Image(std::move(planes));
}

void save_image(const Image& img, const std::filesystem::path& path) {
  const Index channels = img.channels();
  if (channels != 1 && channels != 3)
    throw ValidationError("raster output needs 1 or 3 channels, got " + std::to_string(channels));
  for (const auto& p : img.planes())
    if (p.minCoeff() < 0.0 || p.maxCoeff() > 1.0)
      throw ValidationError("raster output values must lie in [0,1]");
  std::string out = pnm_header(channels == 3 ? 6 : 5, img.width(), img.height());
  out.reserve(out.size() + static_cast<std::size_t>(img.pixels() * channels));
  for (Index i = 0; i < img.pixels(); ++i)
    for (Index c = 0; c < channels; ++c)
      out.push_back(static_cast<char>(quantize(img.channel(c).data()[i])));
  write_file_atomic(path, out);
}

void save_raw(const Image& img, const std::filesystem::path& path) {
  std::string out = "SLAT";
  put_le<std::uint16_t>(out, kRawVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(img.height()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(img.width()));
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(img.channels()));
  out.reserve(out.size() + static_cast<std::size_t>(img.pixels() * img.channels()) * 8);
  for (const auto& p : img.planes())
    for (Index i = 0; i < p.size(); ++i) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(p.data()[i]));
  write_file_atomic(path, out);
}

Image load_raw(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  const std::string name = path.string();
  constexpr std::size_t kHeader = 4 + 2 + 4 + 4 + 2;
  if (bytes.size() < kHeader) throw ValidationError(name + ": truncated SLAT header");
  if (bytes.compare(0, 4, "SLAT") != 0) throw ValidationError(name + ": bad magic, not a SLAT file");
  std::size_t pos = 4;
  const auto version = get_le<std::uint16_t>(bytes, pos);
  if (version != kRawVersion)
    throw ValidationError(name + ": unsupported SLAT version " + std::to_string(version));
  const auto height = get_le<std::uint32_t>(bytes, pos);
  const auto width = get_le<std::uint32_t>(bytes, pos);
  const auto channels = get_le<std::uint16_t>(bytes, pos);
  const std::size_t count = static_cast<std::size_t>(height) * width * channels;
  if (height == 0 || width == 0 || channels == 0) throw ValidationError(name + ": empty SLAT image");
  if (bytes.size() - kHeader != count * 8) throw ValidationError(name + ": truncated SLAT payload");
  std::vector<double> data(count);
  for (auto& v : data) v = std::bit_cast<double>(get_le<std::uint64_t>(bytes, pos));
  return Image::from_planar(height, width, channels, data);
}

void save_labels(const LabelMap& labels, const std::filesystem::path& path) {
  if (labels.phases() > 255) throw ValidationError("label PGM holds at most 255 phases");
  std::string out = pnm_header(5, labels.width(), labels.height());
  for (Index i = 0; i < labels.labels().size(); ++i)
    out.push_back(static_cast<char>(labels.labels().data()[i]));
  write_file_atomic(path, out);
}

LabelMap load_labels(const std::filesystem::path& path, int phases) {
  const Pnm pnm = parse_pnm(path);
  if (pnm.magic != 5) throw ValidationError(path.string() + ": label map must be a PGM");
  LabelPlane labels(pnm.height, pnm.width);
  for (Index i = 0; i < labels.size(); ++i)
    labels.data()[i] = static_cast<unsigned char>(pnm.pixels[static_cast<std::size_t>(i)]);
  const int k = phases > 0 ? phases : labels.maxCoeff();
  return LabelMap(std::move(labels), k);
}

Mask load_mask(const std::filesystem::path& path, Index channels) {
  const Pnm pnm = parse_pnm(path);
  const Index file_channels = pnm.magic == 6 ? 3 : 1;
  if (file_channels != 1 && file_channels != channels)
    throw ValidationError(path.string() + ": mask channel count does not match the image");
  std::vector<MaskPlane> planes;
  for (Index c = 0; c < channels; ++c) {
    MaskPlane plane(pnm.height, pnm.width);
    const Index src = file_channels == 1 ? 0 : c;
    for (Index i = 0; i < plane.size(); ++i)
      plane.data()[i] = pnm.pixels[static_cast<std::size_t>(i * file_channels + src)] != 0;
    planes.push_back(std::move(plane));
  }
  return Mask(std::move(planes));
}

void save_mask(const Mask& mask, const std::filesystem::path& path) {
  const Index channels = mask.channels();
  bool shared = true;
  for (Index c = 1; c < channels; ++c) shared = shared && (mask.channel(c) == mask.channel(0)).all();
  const Index out_channels = shared ? 1 : channels;
  if (out_channels != 1 && out_channels != 3)
    throw ValidationError("per-channel masks can only be written for 3 channels");
  std::string out = pnm_header(out_channels == 3 ? 6 : 5, mask.width(), mask.height());
  for (Index i = 0; i < mask.height() * mask.width(); ++i)
    for (Index c = 0; c < out_channels; ++c)
      out.push_back(static_cast<char>(mask.channel(c).data()[i] ? 255 : 0));
  write_file_atomic(path, out);
}

}  // namespace slat::io
