#pragma once
// Minimal PNG reader/writer for 8-bit RGB, no interlacing. deflate and CRC
// come from zlib; filtering is our own (filter 0 on write, all five filter
// types accepted on read). Hand-rolled instead of libpng so dataset bytes
// depend on nothing but zlib's deflate and stay reproducible.

#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace aan {

struct ImageRGB {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, 3 bytes per pixel

  std::uint8_t* at(std::uint32_t x, std::uint32_t y) { return &pixels[(y * width + x) * 3]; }
  const std::uint8_t* at(std::uint32_t x, std::uint32_t y) const {
    return &pixels[(y * width + x) * 3];
  }
};

namespace pngdetail {

inline void put_u32be(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline std::uint32_t get_u32be(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
         (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

inline void append_chunk(std::vector<std::uint8_t>& out, const char type[4],
                         const std::uint8_t* data, std::uint32_t len) {
  put_u32be(out, len);
  std::size_t type_off = out.size();
  out.insert(out.end(), type, type + 4);
  if (len) out.insert(out.end(), data, data + len);
  std::uint32_t crc = static_cast<std::uint32_t>(
      crc32(0, out.data() + type_off, 4 + len));
  put_u32be(out, crc);
}

inline int paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

}  // namespace pngdetail

inline std::vector<std::uint8_t> encode_png(const ImageRGB& img) {
  using namespace pngdetail;
  if (img.pixels.size() != std::size_t(img.width) * img.height * 3)
    throw std::runtime_error("png: pixel buffer size mismatch");

  static const std::uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
  std::vector<std::uint8_t> out(sig, sig + 8);

  std::uint8_t ihdr[13];
  ihdr[0] = static_cast<std::uint8_t>(img.width >> 24);
  ihdr[1] = static_cast<std::uint8_t>(img.width >> 16);
  ihdr[2] = static_cast<std::uint8_t>(img.width >> 8);
  ihdr[3] = static_cast<std::uint8_t>(img.width);
  ihdr[4] = static_cast<std::uint8_t>(img.height >> 24);
  ihdr[5] = static_cast<std::uint8_t>(img.height >> 16);
  ihdr[6] = static_cast<std::uint8_t>(img.height >> 8);
  ihdr[7] = static_cast<std::uint8_t>(img.height);
  ihdr[8] = 8;   // bit depth
  ihdr[9] = 2;   // color type: truecolor
  ihdr[10] = 0;  // compression
  ihdr[11] = 0;  // filter method
  ihdr[12] = 0;  // no interlace
  append_chunk(out, "IHDR", ihdr, 13);

  // Raw scanlines, filter byte 0 per row.
  const std::size_t stride = std::size_t(img.width) * 3;
  std::vector<std::uint8_t> raw;
  raw.reserve((stride + 1) * img.height);
  for (std::uint32_t y = 0; y < img.height; ++y) {
    raw.push_back(0);
    raw.insert(raw.end(), img.pixels.begin() + y * stride,
               img.pixels.begin() + (y + 1) * stride);
  }

  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> comp(bound);
  if (compress2(comp.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
    throw std::runtime_error("png: deflate failed");
  append_chunk(out, "IDAT", comp.data(), static_cast<std::uint32_t>(bound));
  append_chunk(out, "IEND", nullptr, 0);
  return out;
}

inline ImageRGB decode_png(const std::vector<std::uint8_t>& buf) {
  using namespace pngdetail;
  static const std::uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
  if (buf.size() < 8 || std::memcmp(buf.data(), sig, 8) != 0)
    throw std::runtime_error("png: bad signature");

  ImageRGB img;
  bool saw_ihdr = false;
  std::vector<std::uint8_t> idat;
  std::size_t pos = 8;
  while (pos + 12 <= buf.size()) {
    const std::uint32_t len = get_u32be(&buf[pos]);
    if (pos + 12 + std::size_t(len) > buf.size())
      throw std::runtime_error("png: truncated chunk");
    const char* type = reinterpret_cast<const char*>(&buf[pos + 4]);
    const std::uint8_t* data = &buf[pos + 8];
    const std::uint32_t want_crc = get_u32be(&buf[pos + 8 + len]);
    const std::uint32_t have_crc =
        static_cast<std::uint32_t>(crc32(0, &buf[pos + 4], 4 + len));
    if (want_crc != have_crc) throw std::runtime_error("png: chunk crc mismatch");

    if (std::memcmp(type, "IHDR", 4) == 0) {
      if (len != 13) throw std::runtime_error("png: bad IHDR length");
      img.width = get_u32be(data);
      img.height = get_u32be(data + 4);
      if (img.width == 0 || img.height == 0)
        throw std::runtime_error("png: zero dimension");
      if (data[8] != 8 || data[9] != 2 || data[10] != 0 || data[11] != 0 || data[12] != 0)
        throw std::runtime_error("png: unsupported format (need 8-bit RGB, no interlace)");
      saw_ihdr = true;
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), data, data + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      break;
    }
    pos += 12 + len;
  }
  if (!saw_ihdr) throw std::runtime_error("png: missing IHDR");
  if (idat.empty()) throw std::runtime_error("png: missing IDAT");

  const std::size_t stride = std::size_t(img.width) * 3;
  const std::size_t raw_size = (stride + 1) * img.height;
  std::vector<std::uint8_t> raw(raw_size);
  uLongf got = static_cast<uLongf>(raw_size);
  const int zr = uncompress(raw.data(), &got, idat.data(), static_cast<uLong>(idat.size()));
  if (zr != Z_OK || got != raw_size) throw std::runtime_error("png: inflate failed");

  img.pixels.assign(stride * img.height, 0);
  const int bpp = 3;
  std::vector<std::uint8_t> prev(stride, 0);
  for (std::uint32_t y = 0; y < img.height; ++y) {
    const std::uint8_t filter = raw[y * (stride + 1)];
    const std::uint8_t* src = &raw[y * (stride + 1) + 1];
    std::uint8_t* dst = &img.pixels[y * stride];
    for (std::size_t i = 0; i < stride; ++i) {
      const int a = i >= std::size_t(bpp) ? dst[i - bpp] : 0;  // left
      const int b = prev[i];                                   // up
      const int c = i >= std::size_t(bpp) ? prev[i - bpp] : 0; // up-left
      int v = src[i];
      switch (filter) {
        case 0: break;
        case 1: v += a; break;
        case 2: v += b; break;
        case 3: v += (a + b) / 2; break;
        case 4: v += paeth(a, b, c); break;
        default: throw std::runtime_error("png: bad filter type");
      }
      dst[i] = static_cast<std::uint8_t>(v & 0xff);
    }
    std::memcpy(prev.data(), dst, stride);
  }
  return img;
}

inline void write_png(const std::string& path, const ImageRGB& img) {
  const auto bytes = encode_png(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("png: cannot open for write: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("png: write failed: " + path);
}

inline ImageRGB read_png(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("png: cannot open: " + path);
  std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
  return decode_png(buf);
}

}  // namespace aan
