#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fracwave/grid.hpp"

namespace fracwave {

// ---------------------------------------------------------------------------
// FWF1 field snapshot format: magic "FWF1", u32 version=1, u32 d,
// u64 N per axis, f64 L per axis, f64 time, then N^d little-endian f64
// values row-major.
// ---------------------------------------------------------------------------

inline void write_fwf1(const std::filesystem::path& path, const Field& f, double time) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  const Grid& g = f.grid;
  os.write("FWF1", 4);
  const std::uint32_t version = 1;
  const std::uint32_t d = static_cast<std::uint32_t>(g.d);
  os.write(reinterpret_cast<const char*>(&version), sizeof(version));
  os.write(reinterpret_cast<const char*>(&d), sizeof(d));
  for (int axis = 0; axis < g.d; ++axis) {
    const std::uint64_t n = static_cast<std::uint64_t>(g.N);
    os.write(reinterpret_cast<const char*>(&n), sizeof(n));
  }
  for (int axis = 0; axis < g.d; ++axis)
    os.write(reinterpret_cast<const char*>(&g.L), sizeof(double));
  os.write(reinterpret_cast<const char*>(&time), sizeof(double));
  os.write(reinterpret_cast<const char*>(f.values.data()),
           static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!os) throw IoError("failed writing " + path.string());
}

struct Fwf1Snapshot {
  Field field;
  double time = 0.0;
};

inline Fwf1Snapshot read_fwf1(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "FWF1", 4) != 0)
    throw IoError(path.string() + ": not an FWF1 file");
  std::uint32_t version = 0, d = 0;
  is.read(reinterpret_cast<char*>(&version), sizeof(version));
  is.read(reinterpret_cast<char*>(&d), sizeof(d));
  if (version != 1) throw IoError(path.string() + ": unsupported FWF1 version");
  if (d < 1 || d > 3) throw IoError(path.string() + ": invalid dimension");
  std::vector<std::uint64_t> n(d);
  for (auto& v : n) is.read(reinterpret_cast<char*>(&v), sizeof(v));
  std::vector<double> L(d);
  for (auto& v : L) is.read(reinterpret_cast<char*>(&v), sizeof(v));
  for (std::uint32_t i = 1; i < d; ++i)
    if (n[i] != n[0] || L[i] != L[0])
      throw IoError(path.string() + ": anisotropic grids are not supported");
  double time = 0.0;
  is.read(reinterpret_cast<char*>(&time), sizeof(time));
  Grid g = make_grid(static_cast<int>(d), static_cast<int>(n[0]), L[0]);
  Fwf1Snapshot snap;
  snap.field = Field(g);
  snap.time = time;
  is.read(reinterpret_cast<char*>(snap.field.values.data()),
          static_cast<std::streamsize>(snap.field.values.size() * sizeof(double)));
  if (!is) throw IoError(path.string() + ": truncated FWF1 payload");
  return snap;
}

// ---------------------------------------------------------------------------
// CSV, 17 significant digits, fixed headers
// ---------------------------------------------------------------------------

inline std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& header) : os_(path) {
    if (!os_) throw IoError("cannot open " + path.string() + " for writing");
    os_ << header << "\n";
  }

  void write_row(const std::vector<double>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os_ << ",";
      os_ << format_g17(row[i]);
    }
    os_ << "\n";
  }

 private:
  std::ofstream os_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(is, line)) throw IoError(path.string() + ": empty CSV");
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) table.header.push_back(cell);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    while (std::getline(ls, cell, ',')) {
      std::size_t pos = 0;
      double value = 0.0;
      try {
        value = std::stod(cell, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != cell.size())
        throw IoError(path.string() + ": malformed cell '" + cell + "'");
      row.push_back(value);
    }
    if (row.size() != table.header.size())
      throw IoError(path.string() + ": row width does not match header");
    table.rows.push_back(std::move(row));
  }
  return table;
}

inline constexpr const char* kEnergyCsvHeader = "t,E,dissipated,norm1,norm2,l2_u,l2_ut";
inline constexpr const char* kSweepCsvHeader =
    "eps,coef_linf,coef_lds,coef_ld2s,data_hs,data_l2,sup_norm1,sup_norm2,terminal_err";
inline constexpr const char* kCoherenceCsvHeader = "eps,l2_err";

}  // namespace fracwave
