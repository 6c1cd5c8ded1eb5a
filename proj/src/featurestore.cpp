// Copyright 2026 The drkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "drkit/featurestore.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "drkit/error.hpp"

namespace drkit {
namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {0x44, 0x46, 0x52, 0x44};  // "DFRD"
constexpr std::uint16_t kVersion = 1;
constexpr std::uint8_t kDtypeF32 = 0;

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  using U = std::make_unsigned_t<T>;
  auto bits = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(bits & 0xFF));
    bits = static_cast<U>(bits >> 8);
  }
}

template <typename T>
T get_le(const std::uint8_t* p) {
  using U = std::make_unsigned_t<T>;
  U v = 0;
  for (std::size_t i = sizeof(T); i-- > 0;) v = static_cast<U>((v << 8) | p[i]);
  return static_cast<T>(v);
}

void read_exact(std::istream& in, std::uint8_t* dst, std::size_t bytes, const std::string& what) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(bytes));
  if (static_cast<std::size_t>(in.gcount()) != bytes) {
    throw LengthError("truncated " + what);
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string> read_nonempty_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) lines.push_back(line);
  }
  return lines;
}

nlohmann::json manifest_to_json(const Manifest& m) {
  nlohmann::json j;
  j["model_name"] = m.model_name;
  j["layer_name"] = m.layer_name;
  j["dataset_name"] = m.dataset_name;
  j["split"] = m.split ? nlohmann::json(to_string(*m.split)) : nlohmann::json(nullptr);
  j["extraction_seed"] =
      m.extraction_seed ? nlohmann::json(*m.extraction_seed) : nlohmann::json(nullptr);
  return j;
}

Manifest manifest_from_json(const nlohmann::json& j) {
  Manifest m;
  m.model_name = j.value("model_name", "");
  m.layer_name = j.value("layer_name", "");
  m.dataset_name = j.value("dataset_name", "");
  if (j.contains("split") && !j["split"].is_null()) {
    m.split = split_from_string(j["split"].get<std::string>());
  }
  if (j.contains("extraction_seed") && !j["extraction_seed"].is_null()) {
    m.extraction_seed = j["extraction_seed"].get<std::int64_t>();
  }
  return m;
}

}  // namespace

std::string to_string(Split split) { return split == Split::train ? "train" : "test"; }

Split split_from_string(const std::string& text) {
  if (text == "train") return Split::train;
  if (text == "test") return Split::test;
  throw ValidationError("split must be 'train' or 'test', got '" + text + "'");
}

bool Manifest::empty() const {
  return model_name.empty() && layer_name.empty() && dataset_name.empty() && !split &&
         !extraction_seed;
}

FeatureDataset::FeatureDataset(FeatureMatrix features, Labels labels, std::uint32_t num_classes,
                               Manifest meta)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      num_classes_(num_classes),
      meta_(std::move(meta)) {
  if (features_.rows() < 1 || features_.cols() < 1) {
    throw ValidationError("dataset needs n >= 1 and d >= 1");
  }
  if (num_classes_ < 1) throw ValidationError("num_classes must be >= 1");
  if (labels_.size() != static_cast<std::size_t>(features_.rows())) {
    throw ValidationError("label count " + std::to_string(labels_.size()) +
                          " does not match row count " + std::to_string(features_.rows()));
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] >= num_classes_) {
      throw ValidationError("label " + std::to_string(labels_[i]) + " at row " +
                            std::to_string(i) + " is not < num_classes " +
                            std::to_string(num_classes_));
    }
  }
  if (!features_.allFinite()) throw DataError("features contain NaN or Inf");
}

std::vector<std::size_t> FeatureDataset::class_counts() const {
  std::vector<std::size_t> counts(num_classes_, 0);
  for (auto y : labels_) ++counts[y];
  return counts;
}

FeatureDataset FeatureDataset::head(std::size_t n) const {
  if (n >= rows()) return *this;
  const auto rows_kept = static_cast<Eigen::Index>(n);
  return FeatureDataset(features_.topRows(rows_kept),
                        Labels(labels_.begin(), labels_.begin() + rows_kept), num_classes_, meta_);
}

bool FeatureDataset::operator==(const FeatureDataset& other) const {
  if (num_classes_ != other.num_classes_ || labels_ != other.labels_ || !(meta_ == other.meta_)) {
    return false;
  }
  if (features_.rows() != other.features_.rows() || features_.cols() != other.features_.cols()) {
    return false;
  }
  // Bitwise comparison so that -0.0f and 0.0f are distinguished.
  const auto* a = features_.data();
  const auto* b = other.features_.data();
  for (Eigen::Index i = 0; i < features_.size(); ++i) {
    if (std::bit_cast<std::uint32_t>(a[i]) != std::bit_cast<std::uint32_t>(b[i])) return false;
  }
  return true;
}

std::filesystem::path manifest_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".manifest.json");
}

void write_fvec(const FeatureDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");

  std::vector<std::uint8_t> buf;
  buf.reserve(kFvecHeaderBytes);
  buf.insert(buf.end(), kMagic.begin(), kMagic.end());
  put_le<std::uint16_t>(buf, kVersion);
  buf.push_back(kDtypeF32);
  buf.push_back(0);
  put_le<std::uint64_t>(buf, ds.rows());
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(ds.dim()));
  put_le<std::uint32_t>(buf, ds.num_classes());
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));

  buf.clear();
  buf.reserve(4 * ds.rows());
  for (auto y : ds.labels()) put_le<std::uint32_t>(buf, y);
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));

  const FeatureMatrix& x = ds.features();
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    buf.clear();
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      put_le<std::uint32_t>(buf, std::bit_cast<std::uint32_t>(x(r, c)));
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  }
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());

  const auto sidecar = manifest_path(path);
  if (!ds.meta().empty()) {
    std::ofstream mf(sidecar, std::ios::trunc);
    if (!mf) throw IoError("cannot open " + sidecar.string() + " for writing");
    mf << manifest_to_json(ds.meta()).dump(2) << '\n';
    if (!mf) throw IoError("write failed for " + sidecar.string());
  } else {
    std::error_code ec;
    std::filesystem::remove(sidecar, ec);
  }
}

FeatureDataset read_fvec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());

  std::array<std::uint8_t, kFvecHeaderBytes> header{};
  read_exact(in, header.data(), header.size(), "header");
  if (!std::equal(kMagic.begin(), kMagic.end(), header.begin())) {
    throw FormatError(path.string() + ": bad magic");
  }
  const auto version = get_le<std::uint16_t>(header.data() + 4);
  if (version != kVersion) {
    throw FormatError(path.string() + ": unsupported version " + std::to_string(version));
  }
  if (header[6] != kDtypeF32) {
    throw FormatError(path.string() + ": unsupported dtype code " + std::to_string(header[6]));
  }
  const auto n = get_le<std::uint64_t>(header.data() + 8);
  const auto d = get_le<std::uint32_t>(header.data() + 16);
  const auto num_classes = get_le<std::uint32_t>(header.data() + 20);
  if (n == 0 || d == 0) throw ValidationError(path.string() + ": n and d must be >= 1");

  const std::uintmax_t file_size = std::filesystem::file_size(path);
  const std::uintmax_t max_rows =
      std::numeric_limits<std::uintmax_t>::max() / (4ULL * (static_cast<std::uintmax_t>(d) + 1));
  if (n > max_rows) throw LengthError(path.string() + ": header sizes overflow");
  const std::uintmax_t expected = kFvecHeaderBytes + 4ULL * n * (static_cast<std::uintmax_t>(d) + 1);
  if (file_size != expected) {
    throw LengthError(path.string() + ": payload is " + std::to_string(file_size) +
                      " bytes, header implies " + std::to_string(expected));
  }

  Labels labels(n);
  std::vector<std::uint8_t> buf(4 * std::max<std::size_t>(n, d));
  read_exact(in, buf.data(), 4 * n, "labels");
  for (std::size_t i = 0; i < n; ++i) labels[i] = get_le<std::uint32_t>(buf.data() + 4 * i);

  FeatureMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t r = 0; r < n; ++r) {
    read_exact(in, buf.data(), 4ULL * d, "feature rows");
    for (std::size_t c = 0; c < d; ++c) {
      const float v = std::bit_cast<float>(get_le<std::uint32_t>(buf.data() + 4 * c));
      if (!std::isfinite(v)) {
        throw DataError(path.string() + ": non-finite feature at row " + std::to_string(r) +
                        ", column " + std::to_string(c));
      }
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
  }

  Manifest meta;
  const auto sidecar = manifest_path(path);
  if (std::filesystem::exists(sidecar)) {
    std::ifstream mf(sidecar);
    try {
      meta = manifest_from_json(nlohmann::json::parse(mf));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(sidecar.string() + ": " + e.what());
    }
  }
  return FeatureDataset(std::move(x), std::move(labels), num_classes, std::move(meta));
}

FeatureDataset ingest_csv(const std::filesystem::path& features_path,
                          const std::filesystem::path& labels_path, std::uint32_t num_classes,
                          Manifest meta) {
  const auto feature_lines = read_nonempty_lines(features_path);
  const auto label_lines = read_nonempty_lines(labels_path);
  if (feature_lines.size() != label_lines.size()) {
    throw ShapeError("features have " + std::to_string(feature_lines.size()) +
                     " rows but labels have " + std::to_string(label_lines.size()));
  }
  if (feature_lines.empty()) throw ValidationError("CSV input is empty");

  std::vector<float> values;
  std::size_t width = 0;
  for (std::size_t r = 0; r < feature_lines.size(); ++r) {
    std::string_view rest = feature_lines[r];
    std::size_t cells = 0;
    while (true) {
      const auto comma = rest.find(',');
      const auto cell = trim(rest.substr(0, comma));
      float v = 0.0f;
      const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || end != cell.data() + cell.size()) {
        throw DataError(features_path.string() + ":" + std::to_string(r + 1) +
                        ": non-numeric cell '" + std::string(cell) + "'");
      }
      values.push_back(v);
      ++cells;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (r == 0) {
      width = cells;
    } else if (cells != width) {
      throw ShapeError(features_path.string() + ":" + std::to_string(r + 1) + ": expected " +
                       std::to_string(width) + " columns, found " + std::to_string(cells));
    }
  }

  Labels labels(label_lines.size());
  for (std::size_t r = 0; r < label_lines.size(); ++r) {
    const auto cell = trim(label_lines[r]);
    std::uint32_t y = 0;
    const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), y);
    if (ec == std::errc::result_out_of_range) {
      throw RangeError(labels_path.string() + ":" + std::to_string(r + 1) + ": label out of range");
    }
    if (ec != std::errc() || end != cell.data() + cell.size()) {
      throw DataError(labels_path.string() + ":" + std::to_string(r + 1) +
                      ": non-numeric label '" + std::string(cell) + "'");
    }
    if (y >= num_classes) {
      throw RangeError(labels_path.string() + ":" + std::to_string(r + 1) + ": label " +
                       std::to_string(y) + " is not < " + std::to_string(num_classes));
    }
    labels[r] = y;
  }

  FeatureMatrix x = Eigen::Map<const FeatureMatrix>(
      values.data(), static_cast<Eigen::Index>(feature_lines.size()),
      static_cast<Eigen::Index>(width));
  return FeatureDataset(std::move(x), std::move(labels), num_classes, std::move(meta));
}

}  // namespace drkit
