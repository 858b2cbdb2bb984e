#include <doctest.h>

#include <fstream>
#include <random>

#include "test_util.hpp"
#include "weaverec/dataset_io.hpp"

using namespace weaverec;
using testutil::TempDir;

namespace {

std::filesystem::path write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  return path;
}

}  // namespace

TEST_CASE("manifest round trip echoes physical metadata") {
  TempDir dir("manifest");
  const auto path = write_text(dir / "m.txt",
                               "# demo dataset\n"
                               "pixel_size_um = 16.1\n"
                               "depth_step_um = 16.1\n"
                               "frame = a.png\n"
                               "frame = b.png\n"
                               "frame = c.png\n"
                               "class = 1 weft\n"
                               "class = 2 warp\n");
  const DatasetManifest m = load_manifest(path);
  CHECK(m.pixel_size_um == doctest::Approx(16.1));
  CHECK(m.depth_step_um == doctest::Approx(16.1));
  CHECK(m.frame_paths.size() == 3);
  CHECK(m.class_map.at(1) == ClassLabel::kWeft);
  CHECK(m.class_map.at(2) == ClassLabel::kWarp);
  CHECK(m.base_dir == dir.path());
}

TEST_CASE("manifest rejects an empty frame list") {
  TempDir dir("manifest");
  const auto path =
      write_text(dir / "m.txt", "pixel_size_um = 16.1\ndepth_step_um = 16.1\n");
  CHECK_THROWS_WITH_AS(load_manifest(path), doctest::Contains("empty frame list"), data_error);
}

TEST_CASE("manifest rejects ground truth length mismatch") {
  TempDir dir("manifest");
  std::string text = "pixel_size_um = 1\ndepth_step_um = 1\n";
  for (int i = 0; i < 5; ++i) text += "frame = f" + std::to_string(i) + ".png\n";
  for (int i = 0; i < 4; ++i) text += "ground_truth = g" + std::to_string(i) + ".png\n";
  CHECK_THROWS_WITH_AS(load_manifest(write_text(dir / "m.txt", text)),
                       doctest::Contains("ground truth length mismatch"), data_error);
}

TEST_CASE("manifest diagnostics carry line number and key") {
  TempDir dir("manifest");
  SUBCASE("unknown key") {
    const auto p = write_text(dir / "m.txt", "pixel_size_um = 1\nvoxel = 2\n");
    CHECK_THROWS_WITH_AS(load_manifest(p), doctest::Contains(":2 (key 'voxel')"), data_error);
  }
  SUBCASE("nonpositive dimension") {
    const auto p = write_text(dir / "m.txt", "pixel_size_um = -2\n");
    CHECK_THROWS_WITH_AS(load_manifest(p), doctest::Contains("must be positive"), data_error);
  }
  SUBCASE("malformed line") {
    const auto p = write_text(dir / "m.txt", "pixel_size_um = 1\nframe\n");
    CHECK_THROWS_WITH_AS(load_manifest(p), doctest::Contains(":2"), data_error);
  }
  SUBCASE("bad class value") {
    const auto p = write_text(dir / "m.txt", "class = 1 weird\n");
    CHECK_THROWS_WITH_AS(load_manifest(p), doctest::Contains("key 'class'"), data_error);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_manifest(dir / "absent.txt"), io_error);
  }
}

TEST_CASE("save_manifest then load_manifest is the identity") {
  TempDir dir("manifest");
  DatasetManifest m;
  m.frame_paths = {"pred/f0.png", "pred/f1.png"};
  m.ground_truth_paths = {"truth/f0.png", "truth/f1.png"};
  m.pixel_size_um = 16.1;
  m.depth_step_um = 8.05;
  m.class_map = {{1, ClassLabel::kWarp}, {7, ClassLabel::kWeft}};
  save_manifest(m, dir / "m.txt");
  const DatasetManifest r = load_manifest(dir / "m.txt");
  CHECK(r.frame_paths == m.frame_paths);
  CHECK(r.ground_truth_paths == m.ground_truth_paths);
  CHECK(r.pixel_size_um == doctest::Approx(m.pixel_size_um));
  CHECK(r.depth_step_um == doctest::Approx(m.depth_step_um));
  CHECK(r.class_map == m.class_map);
}

TEST_CASE("label stack save/load round-trips bit-exactly") {
  TempDir dir("stack");
  std::mt19937_64 rng(7);
  std::vector<LabelFrame> frames;
  for (int i = 0; i < 4; ++i) frames.push_back(testutil::random_frame(rng, 23, 17, i, 9));
  frames[2].at(5, 5) = 65535;  // extreme label survives

  const auto paths = save_label_stack(frames, dir / "out");
  REQUIRE(paths.size() == 4);

  DatasetManifest m;
  m.frame_paths = paths;
  m.pixel_size_um = 1.0;
  m.depth_step_um = 1.0;
  const auto reloaded = load_label_stack(m, StackKind::kPredictions);
  REQUIRE(reloaded.size() == frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    CHECK(reloaded[i].width == frames[i].width);
    CHECK(reloaded[i].height == frames[i].height);
    CHECK(reloaded[i].frame_index == static_cast<int>(i));
    CHECK(reloaded[i].labels == frames[i].labels);
  }
}

TEST_CASE("label stack ordering and dimension checks") {
  TempDir dir("stack");
  std::mt19937_64 rng(3);
  std::vector<LabelFrame> a = {testutil::random_frame(rng, 10, 10, 0, 4),
                               testutil::random_frame(rng, 10, 10, 1, 4),
                               testutil::random_frame(rng, 10, 10, 2, 4)};
  const auto paths = save_label_stack(a, dir / "ok");
  DatasetManifest m;
  m.frame_paths = paths;
  m.pixel_size_um = m.depth_step_um = 1.0;
  const auto frames = load_label_stack(m, StackKind::kPredictions);
  for (int i = 0; i < 3; ++i) CHECK(frames[i].frame_index == i);

  // A background-only frame is valid and has an empty instance set.
  const LabelFrame zeros(10, 10, 0);
  write_label_png(zeros, dir / "zeros.png");
  CHECK(instances_in_frame(read_label_png(dir / "zeros.png", 0)).empty());

  // Mismatched second frame is rejected with its index.
  write_label_png(LabelFrame(10, 12, 0), dir / "bad.png");
  DatasetManifest bad = m;
  bad.frame_paths[1] = dir / "bad.png";
  CHECK_THROWS_WITH_AS(load_label_stack(bad, StackKind::kPredictions),
                       doctest::Contains("dimension mismatch at frame 1"), data_error);
}

TEST_CASE("save_label_stack reports unwritable destinations") {
  const LabelFrame f(4, 4, 0);
  CHECK_THROWS_AS(save_label_stack({f}, "/proc/weaverec_forbidden/out"), io_error);
}

TEST_CASE("instances_in_frame counts exactly") {
  const auto f = testutil::frame_from(2, 2, 0, {0, 3, 3, 7});
  const auto counts = instances_in_frame(f);
  REQUIRE(counts.size() == 2);
  CHECK(counts.at(3) == 2);
  CHECK(counts.at(7) == 1);

  CHECK(instances_in_frame(LabelFrame(5, 4, 0)).empty());

  LabelFrame full(6, 3, 0);
  std::fill(full.labels.begin(), full.labels.end(), std::uint16_t{5});
  CHECK(instances_in_frame(full).at(5) == 6u * 3u);
}

TEST_CASE("instance counts sum to the nonzero pixel count") {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 20; ++round) {
    const auto f = testutil::random_frame(rng, 17, 9, 0, 6);
    std::size_t nonzero = 0;
    for (auto v : f.labels) nonzero += v != 0;
    std::size_t total = 0;
    for (const auto& [id, n] : instances_in_frame(f)) {
      CHECK(id != 0);
      total += n;
    }
    CHECK(total == nonzero);
  }
}

TEST_CASE("grey png round trip preserves quantized intensities") {
  TempDir dir("grey");
  GreyFrame g(9, 7);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (auto& v : g.intensities) v = dist(rng);
  write_grey_png(g, dir / "g.png");
  const GreyFrame r = read_grey_png(dir / "g.png");
  REQUIRE(r.width == g.width);
  REQUIRE(r.height == g.height);
  for (std::size_t i = 0; i < g.intensities.size(); ++i)
    CHECK(std::abs(r.intensities[i] - g.intensities[i]) <= 0.5 / 65535 + 1e-12);
}
