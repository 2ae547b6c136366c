#include "tmsk/csv_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "tmsk/errors.hpp"

namespace tmsk {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    auto b = tok.find_first_not_of(" \t\r");
    auto e = tok.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string{} : tok.substr(b, e - b + 1));
  }
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

double to_double(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw InputError("");
    return v;
  } catch (const std::exception&) {
    throw InputError("bad number '" + s + "' in " + where);
  }
}

long long to_int(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw InputError("");
    return v;
  } catch (const std::exception&) {
    throw InputError("bad integer '" + s + "' in " + where);
  }
}

bool numeric_row(const std::vector<std::string>& cells) {
  for (const auto& c : cells) {
    try {
      std::size_t used = 0;
      std::stod(c, &used);
      if (used != c.size()) return false;
    } catch (const std::exception&) {
      return false;
    }
  }
  return !cells.empty();
}

}  // namespace

void write_grid_csv(const std::string& path, const TruncatedSparseGrid& grid, const DomainMap& domain) {
  const int d = grid.dim();
  auto out = open_out(path);
  std::string header;
  for (const char* prefix : {"l_", "i_", "x_"}) {
    for (int j = 1; j <= d; ++j) {
      if (!header.empty()) header += ',';
      header += prefix + std::to_string(j);
    }
  }
  out << header << '\n';
  for (std::size_t r = 0; r < grid.size(); ++r) {
    const auto& li = grid.row(r);
    std::string line;
    for (int j = 0; j < d; ++j) line += std::to_string(li.level[j]) + ',';
    for (int j = 0; j < d; ++j) line += std::to_string(li.index[j]) + ',';
    const auto x = domain.from_unit(grid.point(r));
    for (int j = 0; j < d; ++j) line += fmt(x[j]) + (j + 1 < d ? "," : "");
    out << line << '\n';
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

TruncatedSparseGrid read_grid_csv(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw InputError("grid file '" + path + "' is empty");
  const auto header = split(line);
  if (header.size() % 3 != 0 || header.empty() || header[0] != "l_1")
    throw InputError("grid file '" + path + "' must start with header l_1..l_d,i_1..i_d,x_1..x_d");
  const std::size_t d = header.size() / 3;
  std::vector<LevelIndex> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    const std::string where = path + ":" + std::to_string(lineno);
    if (cells.size() != 3 * d) throw InputError("wrong column count at " + where);
    LevelIndex li{std::vector<int>(d), std::vector<std::int64_t>(d)};
    for (std::size_t j = 0; j < d; ++j) {
      li.level[j] = static_cast<int>(to_int(cells[j], where));
      li.index[j] = to_int(cells[d + j], where);
    }
    if (!li.is_canonical()) throw InputError("non-canonical level/index at " + where);
    rows.push_back(std::move(li));
  }
  return TruncatedSparseGrid::from_rows(static_cast<int>(d), std::move(rows));
}

Observations read_observations_csv(const std::string& path, std::size_t n) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw InputError("observation file '" + path + "' is empty");
  const auto header = split(line);
  Observations obs;
  std::size_t lineno = 1;
  if (header == std::vector<std::string>{"point_id", "rep_index", "value"}) {
    obs.from_replications = true;
    std::vector<std::map<long long, double>> reps(n);
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const auto cells = split(line);
      const std::string where = path + ":" + std::to_string(lineno);
      if (cells.size() != 3) throw InputError("expected 3 columns at " + where);
      const long long id = to_int(cells[0], where);
      if (id < 0 || static_cast<std::size_t>(id) >= n) throw InputError("point_id out of range at " + where);
      const long long r = to_int(cells[1], where);
      if (!reps[id].emplace(r, to_double(cells[2], where)).second)
        throw InputError("duplicate (point_id, rep_index) at " + where);
    }
    std::vector<std::vector<double>> lists(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto& [r, v] : reps[i]) lists[i].push_back(v);
    }
    auto stats = sample_stats(lists);
    obs.means = std::move(stats.means);
    obs.variances = std::move(stats.variances);
    obs.reps = std::move(stats.reps);
    return obs;
  }
  if (header == std::vector<std::string>{"point_id", "mean", "variance", "m"}) {
    std::vector<bool> seen(n, false);
    obs.means.assign(n, 0.0);
    obs.variances.assign(n, 0.0);
    obs.reps.assign(n, 0);
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const auto cells = split(line);
      const std::string where = path + ":" + std::to_string(lineno);
      if (cells.size() != 4) throw InputError("expected 4 columns at " + where);
      const long long id = to_int(cells[0], where);
      if (id < 0 || static_cast<std::size_t>(id) >= n) throw InputError("point_id out of range at " + where);
      if (seen[id]) throw InputError("duplicate point_id at " + where);
      seen[id] = true;
      obs.means[id] = to_double(cells[1], where);
      obs.variances[id] = to_double(cells[2], where);
      const long long m = to_int(cells[3], where);
      if (m < 1) throw InputError("m must be >= 1 at " + where);
      obs.reps[id] = static_cast<std::size_t>(m);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!seen[i]) throw InputError("no observation for design point " + std::to_string(i));
    }
    return obs;
  }
  throw InputError("observation file '" + path +
                   "' needs header point_id,rep_index,value or point_id,mean,variance,m");
}

std::vector<std::vector<double>> read_points_csv(const std::string& path, std::size_t d) {
  auto in = open_in(path);
  std::vector<std::vector<double>> pts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    if (lineno == 1 && !numeric_row(cells)) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    if (cells.size() != d) throw InputError("expected " + std::to_string(d) + " columns at " + where);
    std::vector<double> x(d);
    for (std::size_t j = 0; j < d; ++j) x[j] = to_double(cells[j], where);
    pts.push_back(std::move(x));
  }
  return pts;
}

void write_predictions_csv(const std::string& path, const std::vector<std::vector<double>>& xs,
                           const std::vector<Prediction>& preds) {
  if (xs.size() != preds.size()) throw InputError("prediction count mismatch");
  auto out = open_out(path);
  const std::size_t d = xs.empty() ? 0 : xs.front().size();
  for (std::size_t j = 1; j <= d; ++j) out << "x_" << j << ',';
  out << "mean,mse\n";
  for (std::size_t k = 0; k < xs.size(); ++k) {
    for (double v : xs[k]) out << fmt(v) << ',';
    out << fmt(preds[k].mean) << ',' << fmt(preds[k].mse) << '\n';
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

void write_matrix_market(std::ostream& out, const SparseSymMatrix& m) {
  const auto upper = m.upper_entries();
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << m.order() << ' ' << m.order() << ' ' << upper.size() << '\n';
  // Symmetric MatrixMarket stores the lower triangle.
  std::vector<Triplet> lower;
  lower.reserve(upper.size());
  for (const auto& t : upper) lower.push_back({t.col, t.row, t.value});
  std::sort(lower.begin(), lower.end(),
            [](const Triplet& a, const Triplet& b) { return a.col != b.col ? a.col < b.col : a.row < b.row; });
  for (const auto& t : lower) out << t.row + 1 << ' ' << t.col + 1 << ' ' << fmt(t.value) << '\n';
}

void write_matrix_market(const std::string& path, const SparseSymMatrix& m) {
  auto out = open_out(path);
  write_matrix_market(out, m);
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace tmsk
