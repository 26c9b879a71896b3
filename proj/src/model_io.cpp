#include "snn/model_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "snn/error.hpp"
#include "snn/image_io.hpp"

namespace snn {

namespace {

constexpr const char* kMagic = "snncp v1";

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, static_cast<size_t>(res.ptr - buf));
}

double parse_double(const std::string& text, const std::string& what) {
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw FormatError("checkpoint: bad number '" + text + "' in " + what);
  return v;
}

void put_float(std::ostream& out, double value) {
  const auto bits = std::bit_cast<uint32_t>(static_cast<float>(value));
  const unsigned char bytes[4] = {static_cast<unsigned char>(bits), static_cast<unsigned char>(bits >> 8),
                                  static_cast<unsigned char>(bits >> 16), static_cast<unsigned char>(bits >> 24)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

}  // namespace

void write_checkpoint(std::ostream& out, const Model& model) {
  if (model.layers.empty()) throw FormatError("cannot save a model without layers");
  out << kMagic << '\n';
  out << "mode " << to_string(model.mode) << '\n';
  out << "input " << model.input_width << ' ' << model.input_height << '\n';
  out << "topology";
  for (int n : model.topology()) out << ' ' << n;
  out << '\n';
  out << "classes " << model.class_count() << '\n';
  for (const auto& name : model.class_names) {
    if (name.find('\n') != std::string::npos) throw FormatError("class name contains a newline");
    out << "class " << name << '\n';
  }
  out << "class_map";
  for (int c : model.class_map) out << ' ' << c;
  out << '\n';
  out << "seed " << model.seed << '\n';
  for (const auto& [key, value] : config_entries(model.config)) out << "config " << key << ' ' << value << '\n';
  long count = 0;
  for (size_t l = 0; l < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    out << "layer " << l << ' ' << layer.pre_count() << ' ' << layer.post_count() << ' '
        << shortest(layer.w_min()) << ' ' << shortest(layer.w_max()) << '\n';
    count += static_cast<long>(layer.weights().size());
  }
  out << "guidance " << model.guidance.rows() << ' ' << model.guidance.cols() << '\n';
  count += static_cast<long>(model.guidance.size());
  out << "payload " << count << '\n';
  for (const auto& layer : model.layers)
    for (Eigen::Index k = 0; k < layer.weights().size(); ++k) put_float(out, layer.weights().data()[k]);
  for (Eigen::Index k = 0; k < model.guidance.size(); ++k) put_float(out, model.guidance.data()[k]);
  if (!out) throw DataError("failed to write checkpoint");
}

Model read_checkpoint(std::istream& in, const std::string& source) {
  auto fail = [&](const std::string& msg) -> FormatError { return FormatError(source + ": " + msg); };
  std::string line;
  if (!std::getline(in, line)) throw fail("empty file");
  if (line.rfind("snncp ", 0) != 0) throw fail("not a checkpoint (bad magic)");
  if (line != kMagic) throw fail("unsupported checkpoint version '" + line.substr(6) + "' (expected v1)");

  Model model;
  std::vector<int> topology;
  struct LayerHeader {
    int pre, post;
    double w_min, w_max;
  };
  std::vector<LayerHeader> layers;
  Eigen::Index guidance_rows = 0, guidance_cols = 0;
  long payload = -1;
  int declared_classes = -1;
  while (payload < 0) {
    if (!std::getline(in, line)) throw fail("truncated header");
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "mode") {
      std::string m;
      ss >> m;
      model.mode = mode_from_string(m);
    } else if (tag == "input") {
      ss >> model.input_width >> model.input_height;
    } else if (tag == "topology") {
      int n;
      while (ss >> n) topology.push_back(n);
    } else if (tag == "classes") {
      ss >> declared_classes;
    } else if (tag == "class") {
      model.class_names.push_back(line.size() > 6 ? line.substr(6) : "");
    } else if (tag == "class_map") {
      int c;
      while (ss >> c) model.class_map.push_back(c);
    } else if (tag == "seed") {
      ss >> model.seed;
    } else if (tag == "config") {
      std::string key, value;
      ss >> key >> value;
      try {
        set_config_value(model.config, key, value);
      } catch (const Error& e) {
        throw fail(e.what());
      }
    } else if (tag == "layer") {
      int index;
      LayerHeader h{};
      std::string lo, hi;
      ss >> index >> h.pre >> h.post >> lo >> hi;
      if (!ss || index != static_cast<int>(layers.size())) throw fail("bad layer line '" + line + "'");
      h.w_min = parse_double(lo, "layer bounds");
      h.w_max = parse_double(hi, "layer bounds");
      layers.push_back(h);
    } else if (tag == "guidance") {
      ss >> guidance_rows >> guidance_cols;
    } else if (tag == "payload") {
      ss >> payload;
      if (!ss || payload < 0) throw fail("bad payload line");
    } else {
      throw fail("unknown header line '" + line + "'");
    }
    if (ss.fail() && tag != "topology" && tag != "class_map" && tag != "class")
      throw fail("malformed header line '" + line + "'");
  }

  if (layers.empty()) throw fail("no layers declared");
  if (declared_classes != static_cast<int>(model.class_names.size()))
    throw fail("class count does not match the class names");
  if (topology.size() != layers.size() + 1) throw fail("topology does not match the layers");
  long expected = guidance_rows * guidance_cols;
  for (size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].pre != topology[l] || layers[l].post != topology[l + 1])
      throw fail("layer " + std::to_string(l) + " dimensions disagree with the topology");
    expected += static_cast<long>(layers[l].pre) * layers[l].post;
  }
  if (topology.front() != model.input_width * model.input_height)
    throw fail("input geometry disagrees with the topology");
  if (static_cast<int>(model.class_map.size()) != topology.back())
    throw fail("class_map length disagrees with the output layer");
  if (payload != expected)
    throw fail("payload declares " + std::to_string(payload) + " values, header implies " +
               std::to_string(expected));

  std::vector<unsigned char> bytes(static_cast<size_t>(payload) * 4);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
    throw fail("truncated payload: expected " + std::to_string(payload) + " values, found " +
               std::to_string(in.gcount() / 4));
  if (in.peek() != std::char_traits<char>::eof()) throw fail("trailing bytes after payload");
  size_t pos = 0;
  auto next = [&] {
    const uint32_t bits = static_cast<uint32_t>(bytes[pos]) | static_cast<uint32_t>(bytes[pos + 1]) << 8 |
                          static_cast<uint32_t>(bytes[pos + 2]) << 16 | static_cast<uint32_t>(bytes[pos + 3]) << 24;
    pos += 4;
    return static_cast<double>(std::bit_cast<float>(bits));
  };
  for (const auto& h : layers) {
    Matrix w(h.pre, h.post);
    for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = next();
    if (!w.allFinite()) throw fail("non-finite weight in payload");
    if (!(h.w_min < h.w_max)) throw fail("layer bounds are inverted");
    if ((w.array() < h.w_min).any() || (w.array() > h.w_max).any())
      throw fail("weights outside the declared bounds");
    model.layers.emplace_back(w, h.w_min, h.w_max);
  }
  model.guidance.resize(guidance_rows, guidance_cols);
  for (Eigen::Index k = 0; k < model.guidance.size(); ++k) model.guidance.data()[k] = next();
  return model;
}

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  write_checkpoint(out, model);
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  return read_checkpoint(in, path.string());
}

std::vector<Matrix> feature_maps(const Model& model) {
  if (model.layers.empty()) throw FormatError("model has no layers");
  Matrix composed = model.layers.front().weights();
  for (size_t l = 1; l < model.layers.size(); ++l) composed = composed * model.layers[l].weights();
  std::vector<Matrix> maps;
  for (Eigen::Index j = 0; j < composed.cols(); ++j) {
    Matrix map(model.input_height, model.input_width);
    for (int r = 0; r < model.input_height; ++r)
      for (int c = 0; c < model.input_width; ++c) map(r, c) = composed(r * model.input_width + c, j);
    maps.push_back(std::move(map));
  }
  return maps;
}

std::vector<std::filesystem::path> export_feature_maps(const Model& model,
                                                       const std::filesystem::path& prefix) {
  std::vector<std::filesystem::path> written;
  const auto maps = feature_maps(model);
  for (size_t j = 0; j < maps.size(); ++j) {
    const Matrix& m = maps[j];
    const double lo = m.minCoeff(), hi = m.maxCoeff();
    Matrix scaled = Matrix::Zero(m.rows(), m.cols());
    if (hi > lo) scaled = ((m.array() - lo) * (255.0 / (hi - lo))).matrix();
    std::filesystem::path path = prefix;
    path += "_neuron" + std::to_string(j) + ".pgm";
    save_pgm(path, scaled);
    written.push_back(path);
  }
  return written;
}

ModelStats model_stats(const Model& model) {
  if (model.layers.empty()) throw FormatError("model has no layers");
  ModelStats stats;
  stats.topology = model.topology();
  for (const auto& layer : model.layers)
    stats.parameters += static_cast<long>(layer.pre_count()) * layer.post_count();
  stats.bytes = stats.parameters * 4;
  stats.macs_per_tu = stats.parameters;
  stats.macs_per_image = stats.macs_per_tu * model.config.lif.duration;
  return stats;
}

}  // namespace snn
