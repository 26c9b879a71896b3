#include "snn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "snn/error.hpp"
#include "snn/image_io.hpp"

namespace snn {

namespace fs = std::filesystem;

const char* to_string(Split split) { return split == Split::kTrain ? "train" : "test"; }

std::vector<Sample> Dataset::split(Split which) const {
  std::vector<Sample> out;
  for (const auto& s : samples)
    if (s.split == which) out.push_back(s);
  return out;
}

void Dataset::validate() const {
  if (classes.empty()) throw DataError("dataset has no classes");
  for (const auto& s : samples) {
    if (s.label < 0 || s.label >= class_count())
      throw DataError("sample " + s.path + " has label " + std::to_string(s.label) +
                      " outside the class list");
    if (s.image.width() != samples.front().image.width() ||
        s.image.height() != samples.front().image.height())
      throw DataError("sample " + s.path + " is " + std::to_string(s.image.width()) + "x" +
                      std::to_string(s.image.height()) + ", expected " +
                      std::to_string(samples.front().image.width()) + "x" +
                      std::to_string(samples.front().image.height()));
  }
}

namespace {

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".pgm" || ext == ".png";
}

std::vector<fs::path> sorted_images(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

Dataset load_dataset(const fs::path& root, const SplitSpec& split) {
  if (!fs::is_directory(root)) throw DataError("dataset root " + root.string() + " is not a directory");
  std::vector<fs::path> class_dirs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory()) class_dirs.push_back(entry.path());
  std::sort(class_dirs.begin(), class_dirs.end());
  if (class_dirs.empty()) throw DataError("dataset root " + root.string() + " has no class directories");

  Dataset ds;
  ds.root = root;
  ds.seed = split.seed;
  for (size_t label = 0; label < class_dirs.size(); ++label) {
    const fs::path& dir = class_dirs[label];
    const std::string name = dir.filename().string();
    ds.classes.push_back(name);
    auto add = [&](const fs::path& file, Split which) {
      Sample s;
      s.image = load_image(file);
      s.label = static_cast<int>(label);
      s.split = which;
      s.path = fs::relative(file, root).generic_string();
      ds.samples.push_back(std::move(s));
    };
    size_t added = 0;
    if (fs::is_directory(dir / "train") || fs::is_directory(dir / "test")) {
      for (Split which : {Split::kTrain, Split::kTest}) {
        const fs::path sub = dir / to_string(which);
        if (!fs::is_directory(sub)) continue;
        for (const auto& file : sorted_images(sub)) {
          add(file, which);
          ++added;
        }
      }
    } else {
      auto files = sorted_images(dir);
      std::vector<size_t> order(files.size());
      for (size_t i = 0; i < order.size(); ++i) order[i] = i;
      auto rng = derive_stream(split.seed, label);
      std::shuffle(order.begin(), order.end(), rng);
      const auto n_test = static_cast<size_t>(std::lround(split.test_fraction * static_cast<double>(files.size())));
      std::vector<bool> is_test(files.size(), false);
      for (size_t k = 0; k < n_test && k < order.size(); ++k) is_test[order[k]] = true;
      for (size_t i = 0; i < files.size(); ++i) {
        add(files[i], is_test[i] ? Split::kTest : Split::kTrain);
        ++added;
      }
    }
    if (added == 0) throw DataError("class directory '" + name + "' contains no images");
  }
  ds.validate();
  return ds;
}

void SyntheticSpec::validate() const {
  if (class_count < 2) throw DomainError("synthetic dataset needs at least 2 classes");
  if (size < 16) throw DomainError("synthetic image size must be >= 16");
  if (per_class < 1) throw DomainError("synthetic dataset needs at least 1 training sample per class");
  if (test_per_class < 0) throw DomainError("test_per_class must be >= 0");
}

namespace {

constexpr const char* kPatternNames[] = {"bar", "blobs", "ring"};

// Indicator of class `label`'s target at pixel centre (x, y), in pixels.
struct TargetShape {
  int kind = 0;
  int variant = 0;
  double cx = 0, cy = 0, angle = 0, scale = 1;
  double size = 0;

  bool covers(double x, double y) const {
    const double dx = x - cx, dy = y - cy;
    const double ca = std::cos(angle), sa = std::sin(angle);
    const double u = (ca * dx + sa * dy) / (scale * size);
    const double v = (-sa * dx + ca * dy) / (scale * size);
    switch (kind) {
      case 0:  // oriented bar
        return std::abs(u) <= 0.36 && std::abs(v) <= 0.08;
      case 1: {  // four blobs on a rotated square
        constexpr double kOffsets[4][2] = {{0.2, 0.2}, {-0.2, 0.2}, {0.2, -0.2}, {-0.2, -0.2}};
        for (const auto& o : kOffsets)
          if (std::hypot(u - o[0], v - o[1]) <= 0.1) return true;
        return false;
      }
      default: {  // ring
        const double r = std::hypot(u, v);
        const double radius = 0.28 - 0.04 * (variant % 3);
        return std::abs(r - radius) <= 0.055;
      }
    }
  }
};

Image render_sample(int label, int size, std::mt19937_64& rng) {
  TargetShape shape;
  shape.kind = label % 3;
  shape.variant = label / 3;
  shape.size = size;
  const double jitter = size / 16.0;
  shape.cx = (size - 1) / 2.0 + (2.0 * uniform01(rng) - 1.0) * jitter;
  shape.cy = (size - 1) / 2.0 + (2.0 * uniform01(rng) - 1.0) * jitter;
  const double base_angle = std::numbers::pi / 6.0 + shape.variant * std::numbers::pi / 5.0;
  shape.angle = base_angle + (2.0 * uniform01(rng) - 1.0) * (std::numbers::pi / 15.0);
  shape.scale = 1.0 + (2.0 * uniform01(rng) - 1.0) * 0.1;

  Image img;
  img.max_value = 255.0;
  img.pixels.resize(size, size);
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      const double base = shape.covers(c, r) ? 1.0 : 0.2;
      // Single-look intensity speckle: unit-mean exponential.
      const double speckle = -std::log(1.0 - uniform01(rng));
      img.pixels(r, c) = std::min(255.0, std::round(100.0 * base * speckle));
    }
  }
  return img;
}

std::string class_dir_name(int label) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "c%02d_%s", label, kPatternNames[label % 3]);
  return buf;
}

}  // namespace

Dataset synthesize_dataset(const SyntheticSpec& spec) {
  spec.validate();
  Dataset ds;
  ds.seed = spec.seed;
  for (int k = 0; k < spec.class_count; ++k) {
    ds.classes.push_back(class_dir_name(k));
    auto rng = derive_stream(spec.seed, static_cast<uint64_t>(k));
    for (Split which : {Split::kTrain, Split::kTest}) {
      const int count = which == Split::kTrain ? spec.per_class : spec.test_per_class;
      for (int i = 0; i < count; ++i) {
        Sample s;
        s.image = render_sample(k, spec.size, rng);
        s.label = k;
        s.split = which;
        char name[32];
        std::snprintf(name, sizeof name, "%04d.pgm", i);
        s.path = ds.classes.back() + "/" + to_string(which) + "/" + name;
        ds.samples.push_back(std::move(s));
      }
    }
  }
  return ds;
}

void write_dataset(const fs::path& root, Dataset& ds, const std::string& description) {
  ds.root = root;
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw DataError("cannot create dataset root " + root.string() + ": " + ec.message());
  std::ofstream manifest(root / "manifest.txt");
  if (!manifest) throw DataError("cannot write " + (root / "manifest.txt").string());
  manifest << "# " << description << "\n";
  for (const auto& s : ds.samples) {
    const fs::path file = root / s.path;
    fs::create_directories(file.parent_path(), ec);
    if (ec) throw DataError("cannot create " + file.parent_path().string() + ": " + ec.message());
    save_pgm(file, s.image.pixels);
    manifest << s.path << ' ' << ds.classes[static_cast<size_t>(s.label)] << ' ' << to_string(s.split)
             << '\n';
  }
  if (!manifest) throw DataError("failed writing manifest");
}

Dataset generate_synthetic(const fs::path& root, const SyntheticSpec& spec) {
  Dataset ds = synthesize_dataset(spec);
  write_dataset(root, ds,
                "synthetic speckle dataset seed=" + std::to_string(spec.seed) +
                    " classes=" + std::to_string(spec.class_count) + " per_class=" +
                    std::to_string(spec.per_class) + " test_per_class=" +
                    std::to_string(spec.test_per_class) + " size=" + std::to_string(spec.size));
  return ds;
}

void OrthogonalSpec::validate() const {
  if (class_count < 2) throw DomainError("fixture needs at least 2 classes");
  if (per_class < 1 || test_per_class < 0) throw DomainError("fixture sample counts must be positive");
  if (size < 16) throw DomainError("fixture image size must be >= 16");
  if (!(blob_sigma > 0.0)) throw DomainError("blob_sigma must be > 0");
  if (blobs_per_class < 1) throw DomainError("blobs_per_class must be >= 1");
  if (jitter < 0) throw DomainError("jitter must be >= 0");
}

namespace {

// Blob centres on a regular grid; slot s belongs to class s % class_count.
std::vector<std::pair<double, double>> blob_centres(const OrthogonalSpec& spec, int label) {
  const int slots = spec.class_count * spec.blobs_per_class;
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(slots))));
  const int rows = (slots + cols - 1) / cols;
  const double dx = static_cast<double>(spec.size) / cols;
  const double dy = static_cast<double>(spec.size) / rows;
  std::vector<std::pair<double, double>> centres;
  for (int s = label; s < slots; s += spec.class_count)
    centres.emplace_back((s % cols + 0.5) * dx - 0.5, (s / cols + 0.5) * dy - 0.5);
  return centres;
}

Matrix render_blobs(const OrthogonalSpec& spec, const std::vector<std::pair<double, double>>& centres) {
  Matrix m = Matrix::Zero(spec.size, spec.size);
  const double two_s2 = 2.0 * spec.blob_sigma * spec.blob_sigma;
  for (int r = 0; r < spec.size; ++r)
    for (int c = 0; c < spec.size; ++c)
      for (const auto& [x, y] : centres)
        m(r, c) = std::max(m(r, c), std::exp(-((c - x) * (c - x) + (r - y) * (r - y)) / two_s2));
  return m;
}

}  // namespace

Matrix orthogonal_template(const OrthogonalSpec& spec, int label) {
  spec.validate();
  if (label < 0 || label >= spec.class_count) throw DomainError("fixture label out of range");
  return render_blobs(spec, blob_centres(spec, label));
}

Dataset orthogonal_fixture(const OrthogonalSpec& spec) {
  spec.validate();
  Dataset ds;
  ds.seed = spec.seed;
  for (int k = 0; k < spec.class_count; ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "c%02d_blobs", k);
    ds.classes.push_back(name);
    auto rng = derive_stream(spec.seed, static_cast<uint64_t>(k));
    std::uniform_int_distribution<int> shift(-spec.jitter, spec.jitter);
    for (Split which : {Split::kTrain, Split::kTest}) {
      const int count = which == Split::kTrain ? spec.per_class : spec.test_per_class;
      for (int i = 0; i < count; ++i) {
        auto centres = blob_centres(spec, k);
        for (auto& [x, y] : centres) {
          x += shift(rng);
          y += shift(rng);
        }
        const double amplitude = 200.0 * (0.8 + 0.4 * uniform01(rng));
        Sample s;
        s.image.pixels = (amplitude * render_blobs(spec, centres)).array().round().matrix();
        s.label = k;
        s.split = which;
        std::snprintf(name, sizeof name, "%04d.pgm", i);
        s.path = ds.classes.back() + "/" + to_string(which) + "/" + name;
        ds.samples.push_back(std::move(s));
      }
    }
  }
  return ds;
}

double signal_power(const Image& image) {
  if (image.pixels.size() == 0) return 0.0;
  return image.pixels.squaredNorm() / static_cast<double>(image.pixels.size());
}

Matrix noise_field(const Image& image, double snr_db, std::mt19937_64& rng) {
  const double power = signal_power(image);
  if (!(power > 0.0)) throw NumericError("SNR is undefined for an all-zero image");
  if (std::isnan(snr_db)) throw DomainError("SNR must not be NaN");
  Matrix noise = Matrix::Zero(image.height(), image.width());
  if (std::isinf(snr_db) && snr_db > 0) return noise;
  const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
  std::normal_distribution<double> gauss(0.0, sigma);
  for (Eigen::Index k = 0; k < noise.size(); ++k) noise.data()[k] = gauss(rng);
  return noise;
}

Image add_noise(const Image& image, const NoiseSpec& spec, std::mt19937_64& rng) {
  const Matrix noise = noise_field(image, spec.snr_db, rng);
  Image out = image;
  out.pixels = (image.pixels + noise).cwiseMax(0.0).cwiseMin(image.max_value);
  return out;
}

}  // namespace snn
