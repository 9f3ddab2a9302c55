#include "cvplan/vision/image_io.hpp"

#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <png.h>

namespace cvplan::vision {

namespace {

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageIoError("cannot open image '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

GrayImage decode_png(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
    throw ImageIoError("unreadable PNG '" + path.string() + "': " + image.message);
  image.format = PNG_FORMAT_GRAY;
  GrayImage out{static_cast<int>(image.width), static_cast<int>(image.height), {}};
  out.pixels.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw ImageIoError("unreadable PNG '" + path.string() + "': " + msg);
  }
  return out;
}

GrayImage decode_pgm(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
  std::size_t pos = 2;
  auto next_token = [&]() -> long {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    long value = 0;
    bool any = false;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      value = value * 10 + (bytes[pos++] - '0');
      any = true;
    }
    if (!any) throw ImageIoError("malformed PGM header in '" + path.string() + "'");
    return value;
  };
  const long width = next_token();
  const long height = next_token();
  const long maxval = next_token();
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255)
    throw ImageIoError("unsupported PGM '" + path.string() + "' (need 8-bit P5)");
  ++pos;
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() < pos + n) throw ImageIoError("truncated PGM '" + path.string() + "'");
  return {static_cast<int>(width), static_cast<int>(height),
          std::vector<std::uint8_t>(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                    bytes.begin() + static_cast<std::ptrdiff_t>(pos + n))};
}

}  // namespace

GrayImage read_gray(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  static constexpr std::uint8_t kPngMagic[] = {0x89, 'P', 'N', 'G'};
  if (bytes.size() >= 4 && std::equal(std::begin(kPngMagic), std::end(kPngMagic), bytes.begin()))
    return decode_png(bytes, path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return decode_pgm(bytes, path);
  throw ImageIoError("unrecognized image format '" + path.string() + "' (expected PNG or P5 PGM)");
}

void write_png(const std::filesystem::path& path, const GrayImage& gray) {
  if (gray.width <= 0 || gray.height <= 0 ||
      gray.pixels.size() != static_cast<std::size_t>(gray.width) * static_cast<std::size_t>(gray.height))
    throw ImageIoError("refusing to write malformed image '" + path.string() + "'");
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(gray.width);
  image.height = static_cast<png_uint_32>(gray.height);
  image.format = PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, gray.pixels.data(), 0, nullptr))
    throw ImageIoError("PNG encode failed for '" + path.string() + "': " + image.message);
  std::vector<std::uint8_t> buffer(size);
  if (!png_image_write_to_memory(&image, buffer.data(), &size, 0, gray.pixels.data(), 0, nullptr))
    throw ImageIoError("PNG encode failed for '" + path.string() + "': " + image.message);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(buffer.data()), static_cast<std::streamsize>(size));
  if (!out) throw ImageIoError("cannot write '" + path.string() + "'");
}

}  // namespace cvplan::vision
