#include "fragsim/mass_partition.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "fragsim/errors.hpp"
#include "json.hpp"

namespace fragsim {

MassPartition rearrange(std::vector<double> values) {
  double lead = 0.0;
  for (double v : values) {
    if (v < 0.0 || !std::isfinite(v))
      throw config_error("rearrange: entries must be finite and >= 0");
    lead = std::max(lead, v);
  }
  const double floor = lead * 1e-15;
  MassPartition out;
  out.reserve(values.size());
  for (double v : values)
    if (v > floor && v > 0.0) out.push_back(v);
  std::stable_sort(out.begin(), out.end(), std::greater<double>());
  return out;
}

double l1_distance(const MassPartition& a, const MassPartition& b) {
  const std::size_t n = std::max(a.size(), b.size());
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ai = i < a.size() ? a[i] : 0.0;
    const double bi = i < b.size() ? b[i] : 0.0;
    d += std::abs(ai - bi);
  }
  return d;
}

MassPartition merge(const std::vector<MassPartition>& parts) {
  std::vector<double> all;
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  all.reserve(total);
  for (const auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  std::stable_sort(all.begin(), all.end(), std::greater<double>());
  return all;
}

MassPartition scale(double x, const MassPartition& p) {
  if (!(x > 0.0)) throw config_error("scale: factor must be > 0");
  MassPartition out(p);
  for (double& v : out) v *= x;
  return out;
}

double total_mass(const MassPartition& p) {
  double s = 0.0;
  for (double v : p) s += v;
  return s;
}

bool is_non_increasing(const MassPartition& p) {
  for (std::size_t i = 1; i < p.size(); ++i)
    if (p[i] > p[i - 1]) return false;
  return true;
}

std::string partition_to_json(const MassPartition& p) {
  nlohmann::json j = p;
  return j.dump();
}

MassPartition partition_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (!j.is_array()) throw config_error("mass partition: expected JSON array");
  MassPartition p;
  for (const auto& v : j) {
    if (!v.is_number()) throw config_error("mass partition: non-numeric entry");
    p.push_back(v.get<double>());
  }
  for (double v : p)
    if (v <= 0.0) throw config_error("mass partition: entries must be > 0");
  if (!is_non_increasing(p))
    throw config_error("mass partition: entries must be non-increasing");
  return p;
}

}  // namespace fragsim
