#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dcsca/anomaly.hpp"
#include "dcsca/capped_l1.hpp"

namespace dcsca {
namespace io {

/// Binary matrix container: magic "DCSCA1\n", then named entries, each
/// u32 name length + name bytes + u64 rows + u64 cols + row-major doubles
/// (native little-endian). Scalars are stored as 1x1 matrices.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Entries = std::vector<std::pair<std::string, Matrix>>;

void save_entries(const std::string& path, const Entries& entries);
std::map<std::string, Matrix> load_entries(const std::string& path);

/// Anomaly instance files: kind, Y, D, lambda, mu, rho, P_true, Q_true,
/// S_true.
void save_anomaly(const std::string& path, const anomaly::GeneratedInstance& g);
anomaly::GeneratedInstance load_anomaly(const std::string& path);

/// Capped-l1 instance files: kind, A, b, mu, theta, x_true.
void save_capped(const std::string& path, const capped_l1::GeneratedInstance& g);
capped_l1::GeneratedInstance load_capped(const std::string& path);

/// "anomaly", "capped_l1", or throws if the file is not a valid container.
std::string instance_kind(const std::string& path);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace io
}  // namespace dcsca
