#ifndef NLSYS_IO_HPP
#define NLSYS_IO_HPP

#include <chrono>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "nlsys/solver.hpp"

namespace nlsys {

inline constexpr int kSolutionFormatVersion = 1;

/// 64-bit FNV-1a hash.
inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Shortest form with 17 significant digits; round-trips every double.
inline std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace detail {

inline double parse_real(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError("bad numeric value for '" + key + "': " + s);
  }
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace detail

/// Serializes a solution:
///   key: value header lines, a "---" separator, one "r u v" row per node,
///   and a final "checksum: <hex>" line hashing everything before it.
/// `created` defaults to the current UTC time.
inline std::string serialize_solution(const Solution& sol, std::string created = {}) {
  const RadialGrid& g = *sol.grid();
  std::ostringstream os;
  auto kv = [&](const char* key, const std::string& value) { os << key << ": " << value << '\n'; };
  kv("format_version", std::to_string(kSolutionFormatVersion));
  kv("n", std::to_string(sol.params.n));
  kv("q", format_real(sol.params.q));
  kv("omega", format_real(sol.params.omega));
  kv("b", format_real(sol.params.b));
  kv("R", format_real(g.R));
  kv("m", std::to_string(g.m));
  kv("kappa", format_real(sol.kappa));
  kv("j_hat", format_real(sol.j_hat));
  kv("s", format_real(sol.scaling.s));
  kv("t", format_real(sol.scaling.t));
  kv("h1", format_real(sol.residuals.h1));
  kv("h2", format_real(sol.residuals.h2));
  kv("el_residual", format_real(sol.el_residual));
  if (sol.hamiltonian_residual) kv("hamiltonian_residual", format_real(*sol.hamiltonian_residual));
  if (sol.interface_radius) kv("interface_radius", format_real(*sol.interface_radius));
  kv("iterations", std::to_string(sol.iterations));
  kv("converged", sol.converged ? "1" : "0");
  if (!sol.label.empty()) kv("label", sol.label);
  kv("created", created.empty() ? utc_timestamp() : created);
  kv("payload_rows", std::to_string(g.size()));
  os << "---\n";
  for (std::size_t i = 0; i < g.size(); ++i)
    os << format_real(g.r[i]) << ' ' << format_real(sol.pair.u()[i]) << ' ' << format_real(sol.pair.v()[i]) << '\n';
  std::string body = os.str();
  char sum[32];
  std::snprintf(sum, sizeof sum, "%016" PRIx64, fnv1a64(body));
  body += "checksum: ";
  body += sum;
  body += '\n';
  return body;
}

inline Solution deserialize_solution(const std::string& text) {
  const auto marker = text.rfind("checksum: ");
  if (marker == std::string::npos || (marker > 0 && text[marker - 1] != '\n'))
    throw FormatError("corrupt solution file: missing checksum line");
  const std::string body = text.substr(0, marker);
  const std::string stored = detail::trim(std::string_view(text).substr(marker + 10));
  char sum[32];
  std::snprintf(sum, sizeof sum, "%016" PRIx64, fnv1a64(body));
  if (stored != sum) throw FormatError("corrupt solution file: checksum mismatch");

  std::istringstream in(body);
  std::map<std::string, std::string> header;
  std::string line;
  bool separator = false;
  while (std::getline(in, line)) {
    if (line == "---") {
      separator = true;
      break;
    }
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw FormatError("malformed header line: " + line);
    header[detail::trim(std::string_view(line).substr(0, colon))] = detail::trim(std::string_view(line).substr(colon + 1));
  }
  if (!separator) throw FormatError("corrupt solution file: missing payload separator");
  auto get = [&](const std::string& key) -> const std::string& {
    const auto it = header.find(key);
    if (it == header.end()) throw FormatError("missing header field '" + key + "'");
    return it->second;
  };
  const int version = static_cast<int>(detail::parse_real(get("format_version"), "format_version"));
  if (version != kSolutionFormatVersion)
    throw FormatError("unsupported solution format version " + std::to_string(version) + " (expected " +
                      std::to_string(kSolutionFormatVersion) + ")");

  Solution sol;
  sol.params.n = static_cast<int>(detail::parse_real(get("n"), "n"));
  sol.params.q = detail::parse_real(get("q"), "q");
  sol.params.omega = detail::parse_real(get("omega"), "omega");
  sol.params.b = detail::parse_real(get("b"), "b");
  try {
    sol.params.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("stored parameters are invalid: ") + e.what());
  }
  const double R = detail::parse_real(get("R"), "R");
  const int m = static_cast<int>(detail::parse_real(get("m"), "m"));
  const GridPtr grid = make_grid(sol.params.n, R, m);
  const auto rows = static_cast<std::size_t>(detail::parse_real(get("payload_rows"), "payload_rows"));
  if (rows != grid->size()) throw FormatError("payload_rows does not match the grid");

  std::vector<double> u(rows), v(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) throw FormatError("corrupt solution file: payload truncated");
    std::istringstream row(line);
    std::string rs, us, vs, extra;
    if (!(row >> rs >> us >> vs) || (row >> extra)) throw FormatError("malformed payload row " + std::to_string(i));
    const double r = detail::parse_real(rs, "r");
    if (std::abs(r - grid->r[i]) > 1e-12 * R) throw FormatError("payload radii do not match the grid");
    u[i] = detail::parse_real(us, "u");
    v[i] = detail::parse_real(vs, "v");
  }
  if (std::getline(in, line) && !detail::trim(line).empty()) throw FormatError("unexpected data after payload");

  sol.pair = Pair(Field(grid, std::move(u)), Field(grid, std::move(v)), sol.params);
  sol.kappa = detail::parse_real(get("kappa"), "kappa");
  sol.j_hat = detail::parse_real(get("j_hat"), "j_hat");
  sol.scaling.s = detail::parse_real(get("s"), "s");
  sol.scaling.t = detail::parse_real(get("t"), "t");
  sol.residuals.h1 = detail::parse_real(get("h1"), "h1");
  sol.residuals.h2 = detail::parse_real(get("h2"), "h2");
  sol.el_residual = detail::parse_real(get("el_residual"), "el_residual");
  if (header.count("hamiltonian_residual"))
    sol.hamiltonian_residual = detail::parse_real(header["hamiltonian_residual"], "hamiltonian_residual");
  if (header.count("interface_radius"))
    sol.interface_radius = detail::parse_real(header["interface_radius"], "interface_radius");
  sol.iterations = static_cast<int>(detail::parse_real(get("iterations"), "iterations"));
  sol.converged = get("converged") == "1";
  if (header.count("label")) sol.label = header["label"];
  return sol;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path + "'");
  return ss.str();
}

inline void store(const Solution& sol, const std::string& path) { write_text(path, serialize_solution(sol)); }

inline Solution load(const std::string& path) { return deserialize_solution(read_text(path)); }

// ---------------------------------------------------------------------------
// CSV tables.
// ---------------------------------------------------------------------------

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add_row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_.size()) throw InvalidArgument("CSV row width does not match header");
    rows_.push_back(cells);
  }

  [[nodiscard]] std::string str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
      out += '\n';
    };
    line(columns_);
    for (const auto& r : rows_) line(r);
    return out;
  }

  [[nodiscard]] const std::vector<std::string>& columns() const { return columns_; }
  [[nodiscard]] const std::vector<std::vector<std::string>>& rows() const { return rows_; }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

/// Parses a CSV produced by CsvTable (no quoting).
inline CsvTable parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(l);
    while (std::getline(ls, cell, ',')) cells.push_back(detail::trim(cell));
    if (!l.empty() && l.back() == ',') cells.emplace_back();
    return cells;
  };
  if (!std::getline(in, line)) throw FormatError("empty CSV");
  CsvTable table(split(line));
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    auto cells = split(line);
    if (cells.size() != table.columns().size()) throw FormatError("CSV row width mismatch: " + line);
    table.add_row(cells);
  }
  return table;
}

inline CsvTable sweep_table(const std::vector<SweepRecord>& records) {
  CsvTable t({"b", "kappa", "overlap", "scaled_overlap", "iterations"});
  for (const auto& r : records) {
    if (r.error) continue;
    t.add_row({format_real(r.b), format_real(r.kappa), format_real(r.overlap), format_real(r.scaled_overlap),
               std::to_string(r.iterations)});
  }
  return t;
}

inline CsvTable domain_table(const std::vector<DomainRecord>& records) {
  CsvTable t({"R", "m", "kappa", "iterations"});
  for (const auto& r : records) {
    if (r.error) continue;
    t.add_row({format_real(r.R), std::to_string(r.m), format_real(r.kappa), std::to_string(r.iterations)});
  }
  return t;
}

}  // namespace nlsys

#endif  // NLSYS_IO_HPP
