#include "proxmcmc/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace proxmcmc {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// std::strtod rather than std::stod: the latter throws on subnormals,
// which format_g17 legitimately emits.
double parse_double(const std::string& cell, const std::string& context) {
  const std::string t = trim(cell);
  if (t.empty()) throw IoError(context + ": empty numeric cell");
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end == t.c_str() || *end != '\0')
    throw IoError(context + ": not a number: '" + t + "'");
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_pgm(const std::string& path, const Image& img, int bits) {
  if (bits != 8 && bits != 16) throw ParameterError("write_pgm: bits must be 8 or 16");
  if (img.rows < 1 || img.cols < 1) throw ParameterError("write_pgm: empty image");
  double lo = img.data[0];
  double hi = img.data[0];
  for (double v : img.data) {
    if (!std::isfinite(v)) throw ParameterError("write_pgm: non-finite pixel");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(hi > lo)) hi = lo + 1.0;

  const int maxval = bits == 8 ? 255 : 65535;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("write_pgm: cannot open " + path);
  f << "P5\n# scale " << format_g17(lo) << " " << format_g17(hi) << "\n"
    << img.cols << " " << img.rows << "\n" << maxval << "\n";
  const double scale = static_cast<double>(maxval) / (hi - lo);
  for (double v : img.data) {
    long q = std::lround((v - lo) * scale);
    q = std::clamp(q, 0L, static_cast<long>(maxval));
    if (bits == 8) {
      const unsigned char b = static_cast<unsigned char>(q);
      f.write(reinterpret_cast<const char*>(&b), 1);
    } else {
      const unsigned char b[2] = {static_cast<unsigned char>(q >> 8),
                                  static_cast<unsigned char>(q & 0xff)};
      f.write(reinterpret_cast<const char*>(b), 2);
    }
  }
  if (!f) throw IoError("write_pgm: write failed for " + path);
}

namespace {

/// Next whitespace-delimited token, skipping '#' comments; scale comments
/// are captured into lo/hi.
std::string next_pgm_token(std::istream& in, double* lo, double* hi) {
  for (;;) {
    int c = in.get();
    if (c == EOF) throw IoError("read_pgm: truncated header");
    if (std::isspace(c)) continue;
    if (c == '#') {
      std::string comment;
      std::getline(in, comment);
      std::istringstream cs(comment);
      std::string tag;
      double a = 0.0;
      double b = 0.0;
      if (cs >> tag >> a >> b && tag == "scale") {
        *lo = a;
        *hi = b;
      }
      continue;
    }
    std::string tok;
    tok.push_back(static_cast<char>(c));
    while (in.good()) {
      c = in.peek();
      if (c == EOF || std::isspace(c)) break;
      tok.push_back(static_cast<char>(in.get()));
    }
    return tok;
  }
}

}  // namespace

Image read_pgm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("read_pgm: cannot open " + path);
  double lo = 0.0;
  double hi = 1.0;
  if (next_pgm_token(f, &lo, &hi) != "P5")
    throw IoError("read_pgm: not a binary PGM: " + path);
  int cols = 0;
  int rows = 0;
  long maxval = 0;
  try {
    cols = std::stoi(next_pgm_token(f, &lo, &hi));
    rows = std::stoi(next_pgm_token(f, &lo, &hi));
    maxval = std::stol(next_pgm_token(f, &lo, &hi));
  } catch (const std::exception&) {
    throw IoError("read_pgm: malformed header in " + path);
  }
  if (cols < 1 || rows < 1 || maxval < 1 || maxval > 65535)
    throw IoError("read_pgm: unsupported dimensions in " + path);
  f.get();  // single whitespace after maxval

  const int bytes = maxval > 255 ? 2 : 1;
  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  std::vector<unsigned char> raw(n * static_cast<std::size_t>(bytes));
  f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(f.gcount()) != raw.size())
    throw IoError("read_pgm: truncated pixel data in " + path);

  Image img(rows, cols);
  const double span = hi - lo;
  for (std::size_t i = 0; i < n; ++i) {
    const long q = bytes == 1 ? raw[i]
                              : (static_cast<long>(raw[2 * i]) << 8) | raw[2 * i + 1];
    img.data[i] = lo + span * static_cast<double>(q) / static_cast<double>(maxval);
  }
  return img;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<Vec>& rows) {
  if (header.empty()) throw ParameterError("write_csv: header must not be empty");
  std::ofstream f(path);
  if (!f) throw IoError("write_csv: cannot open " + path);
  for (std::size_t j = 0; j < header.size(); ++j)
    f << (j ? "," : "") << header[j];
  f << "\n";
  for (const Vec& row : rows) {
    if (row.size() != header.size())
      throw ParameterError("write_csv: row width does not match header");
    for (std::size_t j = 0; j < row.size(); ++j)
      f << (j ? "," : "") << format_g17(row[j]);
    f << "\n";
  }
  if (!f) throw IoError("write_csv: write failed for " + path);
}

void write_matrix_csv(const std::string& path, const Image& img) {
  std::vector<std::string> header(static_cast<std::size_t>(img.cols));
  for (int j = 0; j < img.cols; ++j) header[static_cast<std::size_t>(j)] = "c" + std::to_string(j);
  std::vector<Vec> rows(static_cast<std::size_t>(img.rows));
  for (int i = 0; i < img.rows; ++i)
    rows[static_cast<std::size_t>(i)] =
        Vec(img.data.begin() + static_cast<std::ptrdiff_t>(i) * img.cols,
            img.data.begin() + static_cast<std::ptrdiff_t>(i + 1) * img.cols);
  write_csv(path, header, rows);
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == name) return j;
  throw ConfigError("no such column: " + name);
}

Vec CsvTable::column_values(std::size_t index) const {
  Vec out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = rows[i][index];
  return out;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("read_csv: cannot open " + path);
  std::string line;
  CsvTable table;
  if (!std::getline(f, line)) throw IoError("read_csv: empty file: " + path);
  for (const std::string& cell : split(line, ','))
    table.header.push_back(trim(cell));
  if (table.header.empty()) throw IoError("read_csv: empty header in " + path);

  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split(line, ',');
    if (cells.size() != table.header.size())
      throw IoError("read_csv: row " + std::to_string(line_no) + " has " +
                    std::to_string(cells.size()) + " cells, expected " +
                    std::to_string(table.header.size()) + " in " + path);
    Vec row(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j)
      row[j] = parse_double(cells[j], path + ":" + std::to_string(line_no));
    table.rows.push_back(std::move(row));
  }
  return table;
}

Image read_matrix_csv(const std::string& path) {
  const CsvTable t = read_csv(path);
  if (t.rows.empty()) throw IoError("read_matrix_csv: no data rows in " + path);
  Image img(static_cast<int>(t.rows.size()), static_cast<int>(t.header.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    for (std::size_t j = 0; j < t.header.size(); ++j)
      img.data[i * t.header.size() + j] = t.rows[i][j];
  return img;
}

KvConfig KvConfig::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config file: " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_string(buf.str());
}

KvConfig KvConfig::parse_string(const std::string& text) {
  KvConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key=value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (cfg.map_.count(key) != 0)
      throw ConfigError("duplicate config key: " + key);
    cfg.map_[key] = value;
  }
  return cfg;
}

bool KvConfig::has(const std::string& key) const { return map_.count(key) != 0; }

std::string KvConfig::get(const std::string& key, const std::string& fallback) const {
  const auto it = map_.find(key);
  return it == map_.end() ? fallback : it->second;
}

double KvConfig::get_double(const std::string& key, double fallback) const {
  const auto it = map_.find(key);
  if (it == map_.end()) return fallback;
  const std::string t = trim(it->second);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end == t.c_str() || *end != '\0')
    throw ConfigError("config key " + key + ": not a number: '" + t + "'");
  return v;
}

long KvConfig::get_long(const std::string& key, long fallback) const {
  const auto it = map_.find(key);
  if (it == map_.end()) return fallback;
  const std::string t = trim(it->second);
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(t, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": not an integer: '" + t + "'");
  }
  if (pos != t.size())
    throw ConfigError("config key " + key + ": not an integer: '" + t + "'");
  return v;
}

bool KvConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = map_.find(key);
  if (it == map_.end()) return fallback;
  const std::string t = trim(it->second);
  if (t == "true" || t == "on" || t == "1") return true;
  if (t == "false" || t == "off" || t == "0") return false;
  throw ConfigError("config key " + key + ": not a boolean: '" + t + "'");
}

void KvConfig::set(const std::string& key, const std::string& value) {
  map_[key] = value;
}

void KvConfig::apply_override(const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || trim(assignment.substr(0, eq)).empty())
    throw ConfigError("override must be key=value, got '" + assignment + "'");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void KvConfig::require_known(const std::vector<std::string>& known) const {
  for (const auto& [key, value] : map_) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("unknown config key: " + key);
  }
}

std::string KvConfig::serialize() const {
  std::string out;
  for (const auto& [key, value] : map_) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
  }
  return out;
}

}  // namespace proxmcmc
