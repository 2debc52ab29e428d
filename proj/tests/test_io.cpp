#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "proxmcmc/common.hpp"
#include "proxmcmc/io.hpp"
#include "proxmcmc/rng.hpp"

using namespace proxmcmc;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

/// Scratch directory removed when the test case ends.
struct TempDir {
  std::filesystem::path dir;
  TempDir() {
    dir = std::filesystem::temp_directory_path() /
          ("proxmcmc_io_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(dir, ec);
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

void write_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string read_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

Image random_image(RngStream& rng, int rows, int cols, double lo, double hi) {
  Image img(rows, cols);
  for (double& v : img.data) v = lo + (hi - lo) * rng.uniform();
  return img;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("format_g17 round-trips doubles through text") {
  const Vec values = {0.0,      1.0,     -1.5,       0.1,     1.0 / 3.0,
                      1e300,    5e-324,  -2.75e-19,  12345.0, 6.02214076e23,
                      0.437652819, -9.999999999999998e-3};
  for (double v : values) {
    CAPTURE(v);
    // strtod rather than stod: the subnormal triggers stod's range error.
    CHECK(std::strtod(format_g17(v).c_str(), nullptr) == v);
  }

  CHECK(format_g17(0.5) == "0.5");
  CHECK(format_g17(2.0) == "2");
  CHECK(format_g17(-1.5) == "-1.5");

  const std::string neg_zero = format_g17(-0.0);
  CHECK(neg_zero == "-0");
  CHECK(std::signbit(std::stod(neg_zero)));
}

TEST_CASE("pgm images survive a write and read cycle") {
  TempDir tmp;
  RngStream rng(515, 0);

  SUBCASE("16-bit quantization error is bounded by half a level") {
    const Image img = random_image(rng, 7, 5, -2.0, 3.0);
    const std::string p = tmp.path("a.pgm");
    write_pgm(p, img, 16);
    const Image back = read_pgm(p);
    REQUIRE(back.rows == 7);
    REQUIRE(back.cols == 5);
    double lo = img.data[0];
    double hi = img.data[0];
    for (double v : img.data) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double bound = (hi - lo) / (2.0 * 65535.0) + 1e-12;
    for (std::size_t i = 0; i < img.data.size(); ++i)
      CHECK(std::abs(back.data[i] - img.data[i]) <= bound);
  }

  SUBCASE("8-bit files carry the coarser bound") {
    const Image img = random_image(rng, 4, 9, 0.0, 1.0);
    const std::string p = tmp.path("b.pgm");
    write_pgm(p, img, 8);
    const Image back = read_pgm(p);
    const double bound = 1.0 / (2.0 * 255.0) + 1e-12;
    for (std::size_t i = 0; i < img.data.size(); ++i)
      CHECK(std::abs(back.data[i] - img.data[i]) <= bound);
  }

  SUBCASE("constant images come back exactly") {
    Image img(3, 2);
    img.data.assign(6, 0.7);
    const std::string p = tmp.path("c.pgm");
    write_pgm(p, img);
    const Image back = read_pgm(p);
    for (double v : back.data) CHECK(v == 0.7);
  }

  SUBCASE("the emitted bytes are fixed, including big-endian samples") {
    Image img(1, 2);
    img.data = {0.0, 1.0};
    const std::string p16 = tmp.path("d16.pgm");
    write_pgm(p16, img, 16);
    CHECK(read_bytes(p16) ==
          std::string("P5\n# scale 0 1\n2 1\n65535\n") + std::string("\x00\x00\xff\xff", 4));

    const std::string p8 = tmp.path("d8.pgm");
    write_pgm(p8, img, 8);
    CHECK(read_bytes(p8) ==
          std::string("P5\n# scale 0 1\n2 1\n255\n") + std::string("\x00\xff", 2));
  }

  SUBCASE("files without a scale comment map onto [0, 1]") {
    const std::string p = tmp.path("foreign.pgm");
    write_bytes(p, std::string("P5\n2 2\n255\n") + std::string("\x00\x55\xaa\xff", 4));
    const Image img = read_pgm(p);
    CHECK(img.data[0] == 0.0);
    CHECK(img.data[1] == doctest::Approx(85.0 / 255.0));
    CHECK(img.data[2] == doctest::Approx(170.0 / 255.0));
    CHECK(img.data[3] == 1.0);
  }

  SUBCASE("odd maxval values use the two-byte path when above 255") {
    const std::string p = tmp.path("odd.pgm");
    write_bytes(p, std::string("P5\n1 1\n300\n") + std::string("\x01\x2c", 2));
    const Image img = read_pgm(p);
    CHECK(img.data[0] == 1.0);
  }

  SUBCASE("read errors") {
    CHECK_THROWS_AS(read_pgm(tmp.path("missing.pgm")), IoError);

    const std::string bad_magic = tmp.path("e.pgm");
    write_bytes(bad_magic, "P6\n2 2\n255\n\x00\x00\x00\x00");
    CHECK_THROWS_AS(read_pgm(bad_magic), IoError);

    const std::string truncated = tmp.path("f.pgm");
    write_bytes(truncated, std::string("P5\n2 2\n255\n") + std::string("\x01\x02", 2));
    CHECK_THROWS_AS(read_pgm(truncated), IoError);

    const std::string bad_header = tmp.path("g.pgm");
    write_bytes(bad_header, "P5\nabc 2\n255\n");
    CHECK_THROWS_AS(read_pgm(bad_header), IoError);

    const std::string big_maxval = tmp.path("h.pgm");
    write_bytes(big_maxval, std::string("P5\n1 1\n70000\n") + std::string(2, '\x00'));
    CHECK_THROWS_AS(read_pgm(big_maxval), IoError);

    const std::string zero_maxval = tmp.path("i.pgm");
    write_bytes(zero_maxval, std::string("P5\n1 1\n0\n") + std::string(1, '\x00'));
    CHECK_THROWS_AS(read_pgm(zero_maxval), IoError);
  }

  SUBCASE("write errors") {
    Image img(1, 1);
    img.data = {0.5};
    CHECK_THROWS_AS(write_pgm(tmp.path("j.pgm"), img, 12), ParameterError);

    Image empty;
    CHECK_THROWS_AS(write_pgm(tmp.path("k.pgm"), empty), ParameterError);

    Image bad(1, 1);
    bad.data = {kNan};
    CHECK_THROWS_AS(write_pgm(tmp.path("l.pgm"), bad), ParameterError);

    CHECK_THROWS_AS(write_pgm("/nonexistent-dir/x.pgm", img), IoError);
  }
}

TEST_CASE("csv tables round-trip bitwise") {
  TempDir tmp;
  const std::string p = tmp.path("t.csv");
  const std::vector<std::string> header = {"step", "value", "weight"};
  const std::vector<Vec> rows = {{1.0, 0.1, 1.0 / 3.0},
                                 {2.0, -2.75e-19, 5e-324},
                                 {3.0, 1e300, -0.0}};
  write_csv(p, header, rows);
  const CsvTable t = read_csv(p);
  CHECK(t.header == header);
  REQUIRE(t.rows.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < header.size(); ++j)
      CHECK(t.rows[i][j] == rows[i][j]);

  CHECK(t.column("value") == 1);
  const Vec col = t.column_values(1);
  CHECK(col == Vec{0.1, -2.75e-19, 1e300});
  CHECK_THROWS_AS(t.column("missing"), ConfigError);
}

TEST_CASE("csv parsing accepts padding and rejects malformed rows") {
  TempDir tmp;

  SUBCASE("whitespace is trimmed and blank lines are skipped") {
    const std::string p = tmp.path("pad.csv");
    write_bytes(p, " a , b \n 1.5 , 2 \n\n   \n3,4\n");
    const CsvTable t = read_csv(p);
    CHECK(t.header == std::vector<std::string>{"a", "b"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0] == Vec{1.5, 2.0});
    CHECK(t.rows[1] == Vec{3.0, 4.0});
  }

  SUBCASE("header-only files parse with zero rows") {
    const std::string p = tmp.path("ho.csv");
    write_bytes(p, "x,y\n");
    const CsvTable t = read_csv(p);
    CHECK(t.rows.empty());
  }

  SUBCASE("malformed inputs raise IoError") {
    const std::string ragged = tmp.path("r.csv");
    write_bytes(ragged, "a,b\n1,2,3\n");
    CHECK_THROWS_AS(read_csv(ragged), IoError);

    const std::string trailing = tmp.path("tc.csv");
    write_bytes(trailing, "a,b\n1,2,\n");
    CHECK_THROWS_AS(read_csv(trailing), IoError);

    const std::string empty_cell = tmp.path("ec.csv");
    write_bytes(empty_cell, "a,b,c\n1,,3\n");
    CHECK_THROWS_AS(read_csv(empty_cell), IoError);

    const std::string text_cell = tmp.path("nc.csv");
    write_bytes(text_cell, "a,b\n1,two\n");
    CHECK_THROWS_AS(read_csv(text_cell), IoError);

    const std::string partial = tmp.path("pn.csv");
    write_bytes(partial, "a\n12abc\n");
    CHECK_THROWS_AS(read_csv(partial), IoError);

    const std::string empty = tmp.path("empty.csv");
    write_bytes(empty, "");
    CHECK_THROWS_AS(read_csv(empty), IoError);

    CHECK_THROWS_AS(read_csv(tmp.path("missing.csv")), IoError);
  }

  SUBCASE("write validation") {
    CHECK_THROWS_AS(write_csv(tmp.path("w.csv"), {}, {}), ParameterError);
    CHECK_THROWS_AS(write_csv(tmp.path("w.csv"), {"a", "b"}, {{1.0}}),
                    ParameterError);
    CHECK_THROWS_AS(write_csv("/nonexistent-dir/w.csv", {"a"}, {}), IoError);
  }
}

TEST_CASE("matrix csv files carry generated column names") {
  TempDir tmp;
  Image img(2, 3);
  img.data = {1.0, 0.25, -3.5, 0.1, 1e-12, 7.0};
  const std::string p = tmp.path("m.csv");
  write_matrix_csv(p, img);

  const CsvTable t = read_csv(p);
  CHECK(t.header == std::vector<std::string>{"c0", "c1", "c2"});

  const Image back = read_matrix_csv(p);
  REQUIRE(back.rows == 2);
  REQUIRE(back.cols == 3);
  CHECK(back.data == img.data);

  const std::string empty_rows = tmp.path("er.csv");
  write_bytes(empty_rows, "c0,c1\n");
  CHECK_THROWS_AS(read_matrix_csv(empty_rows), IoError);
}

TEST_CASE("kv config parsing handles comments, trimming and structure") {
  const KvConfig cfg = KvConfig::parse_string(
      "# experiment settings\n"
      "\n"
      "  alpha = 0.33  # prior weight\n"
      "sampler=pmala\n"
      "n_samples = 5000\n"
      "adapt = on\n"
      "tag=b=c\n"
      "empty=\n");
  CHECK(cfg.entries().size() == 6);
  CHECK(cfg.has("alpha"));
  CHECK_FALSE(cfg.has("beta"));
  CHECK(cfg.get("sampler", "x") == "pmala");
  CHECK(cfg.get("missing", "fallback") == "fallback");
  CHECK(cfg.get("tag", "") == "b=c");
  CHECK(cfg.get("empty", "d").empty());
  CHECK(cfg.get_double("alpha", 0.0) == 0.33);
  CHECK(cfg.get_long("n_samples", 0) == 5000);
  CHECK(cfg.get_long("absent", 17) == 17);
  CHECK(cfg.get_bool("adapt", false));

  SUBCASE("structural errors") {
    CHECK_THROWS_AS(KvConfig::parse_string("a=1\na=2\n"), ConfigError);
    CHECK_THROWS_AS(KvConfig::parse_string("just a line\n"), ConfigError);
    CHECK_THROWS_AS(KvConfig::parse_string(" = 5\n"), ConfigError);
  }

  SUBCASE("typed getters reject anything but a full parse") {
    const KvConfig bad = KvConfig::parse_string("x=12abc\ny=3.5\nz=maybe\n");
    CHECK_THROWS_AS(bad.get_double("x", 0.0), ConfigError);
    CHECK_THROWS_AS(bad.get_long("x", 0), ConfigError);
    CHECK_THROWS_AS(bad.get_long("y", 0), ConfigError);
    CHECK_THROWS_AS(bad.get_bool("z", false), ConfigError);
  }

  SUBCASE("boolean spellings") {
    const KvConfig b = KvConfig::parse_string(
        "a=true\nb=on\nc=1\nd=false\ne=off\nf=0\n");
    for (const char* key : {"a", "b", "c"}) CHECK(b.get_bool(key, false));
    for (const char* key : {"d", "e", "f"}) CHECK_FALSE(b.get_bool(key, true));
  }
}

TEST_CASE("kv config overrides and canonical serialization") {
  KvConfig cfg = KvConfig::parse_string("b=two\na=1\n");
  CHECK(cfg.serialize() == "a=1\nb=two\n");

  cfg.set("a", "3");
  CHECK(cfg.get_long("a", 0) == 3);
  cfg.apply_override("  c = 0.5 ");
  CHECK(cfg.get_double("c", 0.0) == 0.5);
  CHECK_THROWS_AS(cfg.apply_override("novalue"), ConfigError);
  CHECK_THROWS_AS(cfg.apply_override(" = 3"), ConfigError);

  const KvConfig round = KvConfig::parse_string(cfg.serialize());
  CHECK(round.entries() == cfg.entries());

  CHECK_NOTHROW(cfg.require_known({"a", "b", "c"}));
  CHECK_THROWS_AS(cfg.require_known({"a", "b"}), ConfigError);
}

TEST_CASE("kv config files parse from disk") {
  TempDir tmp;
  const std::string p = tmp.path("run.cfg");
  write_bytes(p, "seed=7\ndelta = 0.25\n");
  const KvConfig cfg = KvConfig::parse_file(p);
  CHECK(cfg.get_long("seed", 0) == 7);
  CHECK(cfg.get_double("delta", 0.0) == 0.25);
  CHECK_THROWS_AS(KvConfig::parse_file(tmp.path("missing.cfg")), IoError);
}

}
