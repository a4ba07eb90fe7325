#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace pmelab {

/// Binary field file: "PMEF", u32 version, u32 length + kind text, f64 time,
/// u32 length + mesh descriptor, u64 count, then count f64 values in cell
/// order (row-major grid order for masked meshes).  Little-endian hosts only.
struct FieldFile {
  std::string kind;  ///< "phi", "u", ...
  double time = 0;
  std::string descriptor;
  std::vector<double> values;
};

void write_field(const std::string& path, const FieldFile& f);
FieldFile read_field(const std::string& path);

/// Comma-separated, header row, LF endings, 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  /// Row with a leading text column.
  void row(const std::string& label, const std::vector<double>& values);

 private:
  std::ofstream out_;
  std::size_t columns_;
  std::string path_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::size_t column(const std::string& name) const;
};
/// Numeric CSV only.
CsvTable read_csv(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace pmelab
