#pragma once

#include <map>
#include <string>
#include <vector>

#include "proxmcmc/common.hpp"

namespace proxmcmc {

/// Bad configuration file or overrides (unknown key, malformed entry, ...).
struct ConfigError : ParameterError {
  using ParameterError::ParameterError;
};

/// Shortest representation with 17 significant digits; round-trips doubles.
std::string format_g17(double v);

/// Writes a binary (P5) PGM. The image range [lo, hi] maps affinely onto
/// [0, maxval] and is recorded in a `# scale <lo> <hi>` header comment so
/// reads can invert the quantization; a constant image records [lo, lo+1].
/// bits is 8 or 16; 16-bit samples are big-endian per the format.
void write_pgm(const std::string& path, const Image& img, int bits = 16);

/// Reads a P5 PGM, inverting the scale comment written by write_pgm; files
/// without one are mapped to [0, 1].
Image read_pgm(const std::string& path);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<Vec>& rows);

/// Matrix as CSV with generated column names c0..c{cols-1}.
void write_matrix_csv(const std::string& path, const Image& img);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<Vec> rows;

  /// Index of a named column, or ConfigError.
  std::size_t column(const std::string& name) const;
  Vec column_values(std::size_t index) const;
};

/// Parses a header + numeric rows; empty files, ragged rows and non-numeric
/// cells raise IoError.
CsvTable read_csv(const std::string& path);

Image read_matrix_csv(const std::string& path);

/// Flat key=value configuration with '#' comments. Keys are unique when
/// parsed; serialization is canonical (sorted keys, one per line), so
/// parse(serialize(c)) == c.
class KvConfig {
 public:
  KvConfig() = default;

  static KvConfig parse_file(const std::string& path);
  static KvConfig parse_string(const std::string& text);

  bool has(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  /// Overwrites any existing value.
  void set(const std::string& key, const std::string& value);

  /// Applies one "key=value" override.
  void apply_override(const std::string& assignment);

  /// Rejects any key outside the given list.
  void require_known(const std::vector<std::string>& known) const;

  std::string serialize() const;
  const std::map<std::string, std::string>& entries() const { return map_; }

 private:
  std::map<std::string, std::string> map_;
};

}  // namespace proxmcmc
