#include "strb/model_io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "strb/error.hpp"
#include "strb/io.hpp"

namespace strb::rbm {

namespace {

constexpr const char* kMagic = "STRB-MODEL";

using nlohmann::json;

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct Blob {
  std::string name;
  Eigen::Index rows;
  Eigen::Index cols;
  const double* data;
};

std::vector<std::string> theta_names(const std::vector<ThetaId>& ids) {
  std::vector<std::string> out;
  for (ThetaId id : ids) out.emplace_back(to_string(id));
  return out;
}

std::vector<ThetaId> theta_ids(const json& names) {
  std::vector<ThetaId> out;
  for (const auto& n : names) out.push_back(theta_from_string(n.get<std::string>().c_str()));
  return out;
}

}  // namespace

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void save_model(const std::filesystem::path& path, const ModelBundle& b) {
  static_assert(std::endian::native == std::endian::little, "model files are little-endian");
  const ReducedModel& m = b.model;
  const Vector knots = Eigen::Map<const Vector>(b.knots.data(), static_cast<Eigen::Index>(b.knots.size()));
  const std::vector<Blob> blobs{
      {"riesz", m.riesz.rows(), m.riesz.cols(), m.riesz.data()},
      {"init_basis", m.init_basis.rows(), m.init_basis.cols(), m.init_basis.data()},
      {"evolution_basis", m.evolution_basis.rows(), m.evolution_basis.cols(), m.evolution_basis.data()},
      {"bernstein_gram", m.bernstein.gram.rows(), m.bernstein.gram.cols(), m.bernstein.gram.data()},
      {"bernstein_coupling", m.bernstein.coupling.rows(), m.bernstein.coupling.cols(), m.bernstein.coupling.data()},
      {"knots", knots.size(), 1, knots.data()},
      {"init_eigenvalues", b.init_eigenvalues.size(), 1, b.init_eigenvalues.data()},
  };
  json header;
  header["format_version"] = kModelFormatVersion;
  header["config"] = b.config_text;
  header["config_hash"] = hex(fnv1a(b.config_text));
  header["J"] = m.J;
  header["K"] = m.K;
  header["T"] = m.T;
  header["N0"] = m.N0();
  header["N1"] = m.N1();
  header["b_thetas"] = theta_names(m.b_thetas);
  header["g_thetas"] = theta_names(m.g_thetas);
  json table = json::array();
  for (const auto& blob : blobs) table.push_back({{"name", blob.name}, {"rows", blob.rows}, {"cols", blob.cols}});
  header["blobs"] = table;

  std::string out = std::string(kMagic) + "\n" + header.dump() + "\n";
  for (const auto& blob : blobs) {
    const std::size_t bytes = static_cast<std::size_t>(blob.rows * blob.cols) * sizeof(double);
    if (bytes > 0) out.append(reinterpret_cast<const char*>(blob.data), bytes);
  }
  io::write_file_atomic(path, out);
}

ModelBundle load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open model file " + path.string());
  std::string magic;
  std::getline(in, magic);
  if (magic != kMagic) throw ModelError(path.string() + " is not a model file");
  std::string line;
  std::getline(in, line);
  json header;
  try {
    header = json::parse(line);
  } catch (const std::exception& e) {
    throw ModelError(std::string("corrupt model header: ") + e.what());
  }
  try {
    const int version = header.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw ModelError("model format version " + std::to_string(version) + " does not match this build (" +
                       std::to_string(kModelFormatVersion) + ")");
    }
    ModelBundle b;
    b.config_text = header.at("config").get<std::string>();
    if (header.at("config_hash").get<std::string>() != hex(fnv1a(b.config_text))) {
      throw ModelError("model config hash mismatch");
    }
    ReducedModel& m = b.model;
    m.J = header.at("J").get<Eigen::Index>();
    m.K = header.at("K").get<int>();
    m.T = header.at("T").get<double>();
    m.b_thetas = theta_ids(header.at("b_thetas"));
    m.g_thetas = theta_ids(header.at("g_thetas"));

    auto read = [&](const json& entry) {
      const auto rows = entry.at("rows").get<Eigen::Index>();
      const auto cols = entry.at("cols").get<Eigen::Index>();
      if (rows < 0 || cols < 0) throw ModelError("negative blob size");
      Matrix x(rows, cols);
      const auto bytes = static_cast<std::streamsize>(rows * cols * static_cast<Eigen::Index>(sizeof(double)));
      if (bytes > 0 && !in.read(reinterpret_cast<char*>(x.data()), bytes)) throw ModelError("model file truncated");
      return x;
    };
    for (const auto& entry : header.at("blobs")) {
      const std::string name = entry.at("name").get<std::string>();
      Matrix x = read(entry);
      if (name == "riesz") m.riesz = std::move(x);
      else if (name == "init_basis") m.init_basis = std::move(x);
      else if (name == "evolution_basis") m.evolution_basis = std::move(x);
      else if (name == "bernstein_gram") m.bernstein.gram = std::move(x);
      else if (name == "bernstein_coupling") m.bernstein.coupling = std::move(x);
      else if (name == "knots") b.knots.assign(x.data(), x.data() + x.size());
      else if (name == "init_eigenvalues") b.init_eigenvalues = Eigen::Map<Vector>(x.data(), x.size());
      else throw ModelError("unknown blob '" + name + "'");
    }
    if (in.peek() != std::char_traits<char>::eof()) throw ModelError("trailing data in model file");
    if (m.N0() != header.at("N0").get<int>() || m.N1() != header.at("N1").get<int>() ||
        m.riesz.cols() != m.rhs_terms() + m.N1() * m.Q_b()) {
      throw ModelError("model dimensions are inconsistent");
    }
    return b;
  } catch (const ModelError&) {
    throw;
  } catch (const std::exception& e) {
    throw ModelError(std::string("corrupt model header: ") + e.what());
  }
}

}  // namespace strb::rbm
