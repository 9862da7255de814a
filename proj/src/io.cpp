#include "dcsca/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace dcsca {
namespace io {

namespace {

constexpr char kMagic[] = "DCSCA1\n";
constexpr std::size_t kMagicLen = 7;
constexpr double kKindAnomaly = 1.0;
constexpr double kKindCapped = 2.0;

Matrix scalar(double v) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return m;
}

double get_scalar(const std::map<std::string, Matrix>& e, const std::string& k) {
  auto it = e.find(k);
  if (it == e.end() || it->second.size() != 1)
    throw IoError("missing scalar entry: " + k);
  return it->second(0, 0);
}

const Matrix& get_matrix(const std::map<std::string, Matrix>& e,
                         const std::string& k) {
  auto it = e.find(k);
  if (it == e.end()) throw IoError("missing entry: " + k);
  return it->second;
}

}  // namespace

void save_entries(const std::string& path, const Entries& entries) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(kMagic, kMagicLen);
  for (const auto& [name, m] : entries) {
    const std::uint32_t len = std::uint32_t(name.size());
    const std::uint64_t rows = std::uint64_t(m.rows()), cols = std::uint64_t(m.cols());
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(name.data(), len);
    out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
    out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
    out.write(reinterpret_cast<const char*>(m.data()),
              std::streamsize(sizeof(double) * m.size()));
  }
  if (!out) throw IoError("write failed: " + path);
}

std::map<std::string, Matrix> load_entries(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  char magic[kMagicLen];
  if (!in.read(magic, kMagicLen) || std::memcmp(magic, kMagic, kMagicLen) != 0)
    throw IoError("not a dcsca instance file: " + path);

  std::map<std::string, Matrix> out;
  for (;;) {
    std::uint32_t len = 0;
    if (!in.read(reinterpret_cast<char*>(&len), sizeof len)) break;
    if (len > 4096) throw IoError("corrupt entry name in " + path);
    std::string name(len, '\0');
    std::uint64_t rows = 0, cols = 0;
    if (!in.read(name.data(), len) ||
        !in.read(reinterpret_cast<char*>(&rows), sizeof rows) ||
        !in.read(reinterpret_cast<char*>(&cols), sizeof cols))
      throw IoError("truncated entry header in " + path);
    Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    if (!in.read(reinterpret_cast<char*>(m.data()),
                 std::streamsize(sizeof(double) * m.size())))
      throw IoError("truncated entry data in " + path);
    out.emplace(std::move(name), std::move(m));
  }
  return out;
}

void save_anomaly(const std::string& path, const anomaly::GeneratedInstance& g) {
  save_entries(path, {{"kind", scalar(kKindAnomaly)},
                      {"Y", g.problem.Y},
                      {"D", g.problem.D},
                      {"lambda", scalar(g.problem.lambda)},
                      {"mu", scalar(g.problem.mu)},
                      {"rho", scalar(double(g.problem.rho))},
                      {"P_true", g.z_true.P},
                      {"Q_true", g.z_true.Q},
                      {"S_true", g.z_true.S}});
}

anomaly::GeneratedInstance load_anomaly(const std::string& path) {
  const auto e = load_entries(path);
  if (get_scalar(e, "kind") != kKindAnomaly)
    throw IoError("not an anomaly instance: " + path);
  anomaly::GeneratedInstance g;
  g.problem = anomaly::Problem::make(get_matrix(e, "Y"), get_matrix(e, "D"),
                                     get_scalar(e, "lambda"), get_scalar(e, "mu"),
                                     Index(get_scalar(e, "rho")));
  g.z_true = {get_matrix(e, "P_true"), get_matrix(e, "Q_true"),
              get_matrix(e, "S_true")};
  return g;
}

void save_capped(const std::string& path, const capped_l1::GeneratedInstance& g) {
  Matrix b(g.problem.b.size(), 1);
  b.col(0) = g.problem.b;
  Matrix x(g.x_true.size(), 1);
  x.col(0) = g.x_true;
  save_entries(path, {{"kind", scalar(kKindCapped)},
                      {"A", g.problem.A},
                      {"b", b},
                      {"mu", scalar(g.problem.mu)},
                      {"theta", scalar(g.problem.theta)},
                      {"x_true", x}});
}

capped_l1::GeneratedInstance load_capped(const std::string& path) {
  const auto e = load_entries(path);
  if (get_scalar(e, "kind") != kKindCapped)
    throw IoError("not a capped_l1 instance: " + path);
  capped_l1::GeneratedInstance g;
  g.problem = capped_l1::Problem::make(get_matrix(e, "A"),
                                       Vector(get_matrix(e, "b").col(0)),
                                       get_scalar(e, "mu"), get_scalar(e, "theta"));
  g.x_true = get_matrix(e, "x_true").col(0);
  return g;
}

std::string instance_kind(const std::string& path) {
  const auto e = load_entries(path);
  const double kind = get_scalar(e, "kind");
  if (kind == kKindAnomaly) return "anomaly";
  if (kind == kKindCapped) return "capped_l1";
  throw IoError("unknown instance kind in " + path);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(text.data(), std::streamsize(text.size()));
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace io
}  // namespace dcsca
