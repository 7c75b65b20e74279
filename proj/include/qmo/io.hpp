#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qmo/entry_mask.hpp"
#include "qmo/errors.hpp"
#include "qmo/qmatrix.hpp"
#include "qmo/solvers.hpp"

#include "json.hpp"

namespace qmo {

static_assert(std::endian::native == std::endian::little,
              "QMAT I/O writes little-endian words directly");

// ---------------------------------------------------------------------------
// QMAT: magic "QMAT1", then m and n as 64-bit little-endian unsigned, then
// the A0, A1, A2, A3 planes row-major as 64-bit little-endian floats.
// ---------------------------------------------------------------------------

inline void write_qmat(const std::string& path, const QMatrix& a) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  os.write("QMAT1", 5);
  const std::uint64_t dims[2] = {a.rows(), a.cols()};
  os.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  for (int c = 0; c < 4; ++c) {
    const auto& data = a.component(c).data();
    os.write(reinterpret_cast<const char*>(data.data()),
             static_cast<std::streamsize>(data.size() * sizeof(double)));
  }
  if (!os) throw IoError("short write: " + path);
}

inline QMatrix read_qmat(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading: " + path);
  char magic[5];
  is.read(magic, 5);
  if (!is || std::memcmp(magic, "QMAT1", 5) != 0) {
    throw IoError("not a QMAT file: " + path);
  }
  std::uint64_t dims[2];
  is.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!is) throw IoError("truncated QMAT header: " + path);
  QMatrix a(static_cast<std::size_t>(dims[0]),
            static_cast<std::size_t>(dims[1]));
  for (int c = 0; c < 4; ++c) {
    auto& data = a.component(c).data();
    is.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
  }
  if (!is) throw IoError("truncated QMAT payload: " + path);
  return a;
}

// ---------------------------------------------------------------------------
// PPM (P6, 8-bit) images and their pure-quaternion view.
// ---------------------------------------------------------------------------

struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

  bool operator==(const Image&) const = default;
};

inline void write_ppm(const std::string& path, const Image& img) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << "P6\n" << img.width << " " << img.height << "\n255\n";
  os.write(reinterpret_cast<const char*>(img.rgb.data()),
           static_cast<std::streamsize>(img.rgb.size()));
  if (!os) throw IoError("short write: " + path);
}

inline Image read_ppm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading: " + path);
  // Header tokens may be separated by whitespace or '#' comment lines.
  const auto next_token = [&]() {
    std::string tok;
    int ch;
    while ((ch = is.get()) != EOF) {
      if (ch == '#') {
        while ((ch = is.get()) != EOF && ch != '\n') {
        }
        continue;
      }
      if (std::isspace(ch)) {
        if (!tok.empty()) return tok;
        continue;
      }
      tok.push_back(static_cast<char>(ch));
    }
    return tok;
  };
  if (next_token() != "P6") throw IoError("not a P6 PPM: " + path);
  Image img;
  try {
    img.width = std::stoul(next_token());
    img.height = std::stoul(next_token());
    if (std::stoul(next_token()) != 255ul) {
      throw IoError("unsupported PPM maxval (need 255): " + path);
    }
  } catch (const std::logic_error&) {
    throw IoError("malformed PPM header: " + path);
  }
  img.rgb.resize(img.width * img.height * 3);
  is.read(reinterpret_cast<char*>(img.rgb.data()),
          static_cast<std::streamsize>(img.rgb.size()));
  if (!is) throw IoError("truncated PPM payload: " + path);
  return img;
}

/// Pure quaternion view of a color image: channels R, G, B land in the i, j,
/// k planes scaled to [0, 1]; the real plane stays zero.
inline QMatrix image_to_qmatrix(const Image& img) {
  QMatrix a(img.height, img.width);
  for (std::size_t i = 0; i < img.height; ++i) {
    for (std::size_t j = 0; j < img.width; ++j) {
      const std::size_t o = (i * img.width + j) * 3;
      for (int c = 0; c < 3; ++c) {
        a.component(c + 1)(i, j) = static_cast<double>(img.rgb[o + c]) / 255.0;
      }
    }
  }
  return a;
}

/// Quantizes the i, j, k planes back to 8-bit with clamping; the real plane
/// is dropped.
inline Image qmatrix_to_image(const QMatrix& a) {
  Image img;
  img.height = a.rows();
  img.width = a.cols();
  img.rgb.resize(img.width * img.height * 3);
  for (std::size_t i = 0; i < img.height; ++i) {
    for (std::size_t j = 0; j < img.width; ++j) {
      const std::size_t o = (i * img.width + j) * 3;
      for (int c = 0; c < 3; ++c) {
        const double v = std::clamp(a.component(c + 1)(i, j), 0.0, 1.0);
        img.rgb[o + c] = static_cast<std::uint8_t>(std::lround(v * 255.0));
      }
    }
  }
  return img;
}

inline double psnr_db(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height) {
    throw ShapeMismatch("psnr: image dimensions differ");
  }
  double mse = 0.0;
  for (std::size_t t = 0; t < a.rgb.size(); ++t) {
    const double diff =
        (static_cast<double>(a.rgb[t]) - static_cast<double>(b.rgb[t])) / 255.0;
    mse += diff * diff;
  }
  mse /= static_cast<double>(a.rgb.size());
  if (mse <= 1e-300) return 999.0;
  return 10.0 * std::log10(1.0 / mse);
}

// ---------------------------------------------------------------------------
// Mask files: one "row col" pair per line, 0-indexed, observed entries.
// ---------------------------------------------------------------------------

inline void write_mask(const std::string& path, const EntryMask& mask) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  for (const auto& [i, j] : mask.pairs()) os << i << " " << j << "\n";
  if (!os) throw IoError("short write: " + path);
}

inline EntryMask read_mask(const std::string& path, std::size_t rows,
                           std::size_t cols) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open for reading: " + path);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::size_t i, j;
    if (ls >> i >> j) pairs.emplace_back(i, j);
  }
  return EntryMask::from_pairs(rows, cols, pairs);
}

// ---------------------------------------------------------------------------
// Report serialization with fixed field names.
// ---------------------------------------------------------------------------

inline nlohmann::json kkt_report_json(const KktReport& r) {
  return nlohmann::json{{"stationarity", r.stationarity},
                        {"eq_violation", r.eq_violation},
                        {"ineq_violation", r.ineq_violation},
                        {"lambda", r.lambda},
                        {"mu", r.mu},
                        {"complementarity", r.complementarity},
                        {"licq_ok", r.licq_ok}};
}

inline nlohmann::json scid_stationarity_json(const ScidStationarity& s) {
  return nlohmann::json{{"stationary", s.stationary},
                        {"rank_cone_ok", s.rank_cone_ok},
                        {"support_ok", s.support_ok},
                        {"grad_norm", s.grad_norm}};
}

// ---------------------------------------------------------------------------
// Trace serialization: JSON lines with fixed keys.
// ---------------------------------------------------------------------------

inline nlohmann::json trace_record_json(const TraceRecord& r) {
  return nlohmann::json{{"iter", r.iter},   {"obj", r.obj},
                        {"res_y", r.res_y}, {"res_z", r.res_z},
                        {"rank_y", r.rank_y}, {"l0_z", r.l0_z},
                        {"secs", r.secs}};
}

inline void write_trace_jsonl(const std::string& path, const Trace& trace) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  for (const TraceRecord& r : trace) os << trace_record_json(r).dump() << "\n";
  if (!os) throw IoError("short write: " + path);
}

}  // namespace qmo
