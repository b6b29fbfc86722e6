#include "hdc/checkpoint.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "hdc/text.hpp"

namespace hdc {
namespace {

constexpr const char* kMagic = "hdc-checkpoint 1";

struct TensorDecl {
  std::string name;
  std::size_t rows;
  std::size_t cols;
};

std::vector<TensorDecl> tensor_layout(const CascadeModel& model) {
  std::vector<TensorDecl> decls;
  for (std::size_t k = 0; k < model.params.levels.size(); ++k) {
    const auto& level = model.params.levels[k];
    const std::string prefix = "level" + std::to_string(k + 1);
    for (std::size_t l = 0; l < level.block.size(); ++l) {
      const std::string layer = prefix + ".block" + std::to_string(l + 1);
      decls.push_back({layer + ".weight", level.block[l].weight.rows(), level.block[l].weight.cols()});
      decls.push_back({layer + ".bias", level.block[l].bias.rows(), level.block[l].bias.cols()});
    }
    decls.push_back({prefix + ".head.weight", level.head.weight.rows(), level.head.weight.cols()});
    decls.push_back({prefix + ".head.bias", level.head.bias.rows(), level.head.bias.cols()});
  }
  return decls;
}

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffULL) << (8 * (7 - i));
    return r;
  }
  return v;
}

template <typename T>
std::vector<T> parse_list(const std::string& text, char sep, const std::string& key) {
  std::vector<T> out;
  for (const auto& item : split(text, sep)) {
    try {
      if constexpr (std::is_same_v<T, double>) {
        out.push_back(parse_double(item));
      } else {
        out.push_back(static_cast<T>(parse_unsigned(item)));
      }
    } catch (const ParseError& e) {
      throw MalformedCheckpointError("checkpoint header field '" + key + "': " + e.what());
    }
  }
  return out;
}

std::size_t parse_count(const std::string& text, const std::string& key) {
  try {
    return static_cast<std::size_t>(parse_unsigned(text));
  } catch (const ParseError& e) {
    throw MalformedCheckpointError("checkpoint header field '" + key + "': " + e.what());
  }
}

}  // namespace

void write_checkpoint(const CascadeModel& model, std::ostream& out) {
  const auto& cfg = model.config;
  out << kMagic << '\n';
  out << "levels = " << cfg.levels() << '\n';
  out << "input_dim = " << cfg.input_dim << '\n';
  std::vector<std::string> blocks;
  for (const auto& widths : cfg.block_layers) blocks.push_back(join(widths, ','));
  out << "block_layers = " << join(blocks, ';') << '\n';
  out << "embed_dim = " << join(cfg.embed_dim, ',') << '\n';
  out << "lambda = " << join(cfg.lambda, ',') << '\n';
  out << "hard_fraction = " << join(cfg.hard_fraction, ',') << '\n';
  out << "margin = " << format_double(cfg.margin) << '\n';
  out << "seed = " << cfg.seed << '\n';
  std::size_t total = 0;
  for (const auto& t : tensor_layout(model)) {
    out << "tensor " << t.name << ' ' << t.rows << ' ' << t.cols << '\n';
    total += t.rows * t.cols;
  }
  out << "payload_doubles = " << total << '\n';
  out << "end_header\n";
  model.params.for_each_tensor([&](const Matrix& m) {
    for (double v : m.data()) {
      const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
      out.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
    }
  });
}

CascadeModel read_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMagic) {
    throw MalformedCheckpointError("missing checkpoint magic line");
  }
  std::map<std::string, std::string> fields;
  std::vector<TensorDecl> declared;
  bool terminated = false;
  while (std::getline(in, line)) {
    if (line == "end_header") {
      terminated = true;
      break;
    }
    if (line.rfind("tensor ", 0) == 0) {
      std::istringstream ts(line.substr(7));
      TensorDecl d;
      if (!(ts >> d.name >> d.rows >> d.cols)) {
        throw MalformedCheckpointError("bad tensor line: " + line);
      }
      declared.push_back(d);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw MalformedCheckpointError("bad header line: " + line);
    fields[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  if (!terminated) throw MalformedCheckpointError("checkpoint header not terminated");

  auto field = [&](const std::string& key) -> const std::string& {
    auto it = fields.find(key);
    if (it == fields.end()) throw MalformedCheckpointError("checkpoint header lacks '" + key + "'");
    return it->second;
  };

  CascadeConfig cfg;
  const std::size_t levels = parse_count(field("levels"), "levels");
  cfg.input_dim = parse_count(field("input_dim"), "input_dim");
  cfg.block_layers.clear();
  for (const auto& block : split(field("block_layers"), ';')) {
    cfg.block_layers.push_back(parse_list<std::size_t>(block, ',', "block_layers"));
  }
  cfg.embed_dim = parse_list<std::size_t>(field("embed_dim"), ',', "embed_dim");
  cfg.lambda = parse_list<double>(field("lambda"), ',', "lambda");
  cfg.hard_fraction = parse_list<double>(field("hard_fraction"), ',', "hard_fraction");
  cfg.margin = parse_list<double>(field("margin"), ',', "margin").at(0);
  cfg.seed = parse_count(field("seed"), "seed");
  if (cfg.levels() != levels) {
    throw CheckpointShapeError("header declares " + std::to_string(levels) + " levels but " +
                               std::to_string(cfg.levels()) + " blocks");
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw CheckpointShapeError(std::string("checkpoint config invalid: ") + e.what());
  }

  CascadeModel model = init_model(cfg);
  const auto expected = tensor_layout(model);
  if (expected.size() != declared.size()) {
    throw CheckpointShapeError("checkpoint declares " + std::to_string(declared.size()) +
                               " tensors, config implies " + std::to_string(expected.size()));
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto& e = expected[i];
    const auto& d = declared[i];
    if (e.name != d.name || e.rows != d.rows || e.cols != d.cols) {
      throw CheckpointShapeError("tensor " + d.name + " (" + std::to_string(d.rows) + "x" +
                                 std::to_string(d.cols) + ") does not match config (" + e.name +
                                 " " + std::to_string(e.rows) + "x" + std::to_string(e.cols) + ")");
    }
  }
  const std::size_t payload = parse_count(field("payload_doubles"), "payload_doubles");
  if (payload != model.params.count()) {
    throw CheckpointShapeError("payload_doubles does not match tensor shapes");
  }

  std::vector<double> flat(payload);
  for (double& v : flat) {
    std::uint64_t bits = 0;
    if (!in.read(reinterpret_cast<char*>(&bits), sizeof(bits))) {
      throw MalformedCheckpointError("checkpoint payload truncated");
    }
    v = std::bit_cast<double>(to_little_endian(bits));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw MalformedCheckpointError("trailing bytes after checkpoint payload");
  }
  model.params.assign(flat);
  return model;
}

void save_checkpoint(const CascadeModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_checkpoint(model, out);
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

CascadeModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace hdc
