#include "chainqfi/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string_view>
#include <utility>
#include <vector>

#include "chainqfi/error.hpp"

namespace chainqfi {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

double parse_number(std::string_view field, const std::filesystem::path& path, std::size_t line) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (field.empty() || ec != std::errc{} || ptr != last || !std::isfinite(v))
    raise(ErrorCode::ParseError,
          where(path, line) + ": cannot parse number '" + std::string(field) + "'");
  return v;
}

struct Table {
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> lines;
};

Table read_table(const std::filesystem::path& path, std::string_view header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot open " + path.string());
  const auto expected = split(header);
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  Table t;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (lineno == 1 && view.substr(0, 3) == "\xEF\xBB\xBF") view.remove_prefix(3);
    if (trim(view).empty()) continue;
    const auto fields = split(view);
    if (!have_header) {
      if (fields != expected)
        raise(ErrorCode::ParseError,
              where(path, lineno) + ": expected header '" + std::string(header) + "'");
      have_header = true;
      continue;
    }
    if (fields.size() != expected.size())
      raise(ErrorCode::ParseError, where(path, lineno) + ": expected " +
                                       std::to_string(expected.size()) + " fields, got " +
                                       std::to_string(fields.size()));
    std::vector<double> row;
    row.reserve(fields.size());
    for (auto f : fields) row.push_back(parse_number(f, path, lineno));
    t.rows.push_back(std::move(row));
    t.lines.push_back(lineno);
  }
  if (!have_header) raise(ErrorCode::EmptyFile, path.string() + " has no header row");
  if (t.rows.empty()) raise(ErrorCode::EmptyFile, path.string() + " has no data rows");
  return t;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) raise(ErrorCode::IoError, "write failed for " + path.string());
}

SusceptibilityCurve read_susceptibility_csv(const std::filesystem::path& path) {
  const auto table = read_table(path, "T_K,chi_emu_per_mol,sigma");
  std::vector<std::size_t> order(table.rows.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    if (!(r[0] > 0.0))
      raise(ErrorCode::ParseError, where(path, table.lines[i]) +
                                       ": temperature must be > 0, got " + format_double(r[0]));
    if (r[2] < 0.0)
      raise(ErrorCode::ParseError, where(path, table.lines[i]) + ": sigma must be >= 0");
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return table.rows[a][0] < table.rows[b][0]; });
  SusceptibilityCurve c;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& r = table.rows[order[k]];
    if (k > 0 && r[0] == c.temperatures.back())
      raise(ErrorCode::DuplicateAbscissa, where(path, table.lines[order[k]]) +
                                              ": duplicate temperature " + format_double(r[0]));
    c.temperatures.push_back(r[0]);
    c.chi.push_back(r[1]);
    c.sigma.push_back(r[2]);
  }
  return c;
}

void write_susceptibility_csv(const std::filesystem::path& path, const SusceptibilityCurve& curve) {
  curve.validate();
  std::string s = "T_K,chi_emu_per_mol,sigma\n";
  for (std::size_t i = 0; i < curve.size(); ++i)
    s += format_double(curve.temperatures[i]) + "," + format_double(curve.chi[i]) + "," +
         format_double(curve.sigma[i]) + "\n";
  write_text_file(path, s);
}

SpectrumGrid read_spectrum_csv(const std::filesystem::path& path, double temperature) {
  const auto table = read_table(path, "Q_invA,E_meV,intensity,error");
  std::map<std::pair<double, double>, std::pair<double, double>> cells;  // (E, Q) -> (I, err)
  std::vector<double> qs, es;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    const std::pair key{r[1], r[0]};
    const std::pair val{r[2], r[3]};
    const auto [it, inserted] = cells.emplace(key, val);
    if (!inserted && it->second != val)
      raise(ErrorCode::ParseError, where(path, table.lines[i]) + ": cell (Q=" + format_double(r[0]) +
                                       ", E=" + format_double(r[1]) +
                                       ") repeated with different values");
    qs.push_back(r[0]);
    es.push_back(r[1]);
  }
  auto unique_sorted = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  unique_sorted(qs);
  unique_sorted(es);
  if (cells.size() != qs.size() * es.size())
    raise(ErrorCode::IncompleteGrid,
          path.string() + ": " + std::to_string(cells.size()) + " of " +
              std::to_string(qs.size() * es.size()) + " cells present (" +
              std::to_string(qs.size()) + " Q x " + std::to_string(es.size()) + " E)");
  Eigen::MatrixXd inten(es.size(), qs.size()), err(es.size(), qs.size());
  auto it = cells.begin();  // map order is (E, Q) ascending, i.e. row-major
  for (std::size_t r = 0; r < es.size(); ++r)
    for (std::size_t c = 0; c < qs.size(); ++c, ++it) {
      inten(r, c) = it->second.first;
      err(r, c) = it->second.second;
    }
  return make_grid(std::move(qs), std::move(es), std::move(inten), std::move(err), temperature);
}

SpectrumGrid read_spectrum_csv(const std::filesystem::path& path, const DatasetManifest& manifest) {
  manifest.validate();
  return read_spectrum_csv(path, manifest.temperature_k);
}

void write_spectrum_csv(const std::filesystem::path& path, const SpectrumGrid& grid) {
  std::string s = "Q_invA,E_meV,intensity,error\n";
  for (std::size_t r = 0; r < grid.ne(); ++r)
    for (std::size_t c = 0; c < grid.nq(); ++c)
      s += format_double(grid.q_axis()[c]) + "," + format_double(grid.e_axis()[r]) + "," +
           format_double(grid.intensity()(r, c)) + "," + format_double(grid.errors()(r, c)) + "\n";
  write_text_file(path, s);
}

void write_qfi_points_csv(const std::filesystem::path& path, std::span<const QfiPoint> points) {
  std::string s = "T_K,F_Q,err\n";
  for (const auto& p : points)
    s += format_double(p.temperature) + "," + format_double(p.f_q) + "," +
         format_double(p.quadrature_error_estimate) + "\n";
  write_text_file(path, s);
}

}  // namespace chainqfi
