#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "weaverec/dataset_io.hpp"

namespace testutil {

// Unique scratch directory removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    const auto base = std::filesystem::temp_directory_path();
    path_ = base / ("weaverec_" + tag + "_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

inline weaverec::LabelFrame frame_from(int width, int height, int index,
                                       const std::vector<std::uint16_t>& labels) {
  weaverec::LabelFrame f(width, height, index);
  f.labels = labels;
  f.validate();
  return f;
}

inline weaverec::LabelFrame random_frame(std::mt19937_64& rng, int width, int height, int index,
                                         int max_label) {
  weaverec::LabelFrame f(width, height, index);
  std::uniform_int_distribution<int> dist(0, max_label);
  for (auto& v : f.labels) v = static_cast<std::uint16_t>(dist(rng));
  return f;
}

// Paints an axis-aligned rectangle of `label`, inclusive bounds.
inline void paint_rect(weaverec::LabelFrame& f, int r0, int c0, int r1, int c1,
                       std::uint16_t label) {
  for (int r = r0; r <= r1; ++r)
    for (int c = c0; c <= c1; ++c) f.at(r, c) = label;
}

}  // namespace testutil
