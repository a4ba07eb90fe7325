#include "pmelab/field_io.hpp"

#include <cstdint>
#include <cstdlib>
#include <sstream>

#include "pmelab/errors.hpp"
#include "pmelab/util.hpp"

namespace pmelab {

namespace {

constexpr char kMagic[4] = {'P', 'M', 'E', 'F'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ofstream& o, const T& v) {
  o.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in, const std::string& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw IoError("truncated field file " + path);
  return v;
}

void put_text(std::ofstream& o, const std::string& s) {
  put(o, static_cast<std::uint32_t>(s.size()));
  o.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_text(std::ifstream& in, const std::string& path) {
  const auto n = get<std::uint32_t>(in, path);
  if (n > (1u << 20)) throw IoError("implausible text length in " + path);
  std::string s(n, '\0');
  if (!in.read(s.data(), n)) throw IoError("truncated field file " + path);
  return s;
}

}  // namespace

void write_field(const std::string& path, const FieldFile& f) {
  std::ofstream o(path, std::ios::binary | std::ios::trunc);
  if (!o) throw IoError("cannot write " + path);
  o.write(kMagic, 4);
  put(o, kVersion);
  put_text(o, f.kind);
  put(o, f.time);
  put_text(o, f.descriptor);
  put(o, static_cast<std::uint64_t>(f.values.size()));
  o.write(reinterpret_cast<const char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!o) throw IoError("write failed for " + path);
}

FieldFile read_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != std::string(kMagic, 4)) throw IoError(path + " is not a field file");
  const auto version = get<std::uint32_t>(in, path);
  if (version != kVersion) throw IoError("unsupported field file version " + std::to_string(version));
  FieldFile f;
  f.kind = get_text(in, path);
  f.time = get<double>(in, path);
  f.descriptor = get_text(in, path);
  const auto n = get<std::uint64_t>(in, path);
  if (n > (1ull << 32)) throw IoError("implausible value count in " + path);
  f.values.resize(n);
  if (!in.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(n * sizeof(double)))) {
    throw IoError("truncated field file " + path);
  }
  return f;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary | std::ios::trunc), columns_(header.size()), path_(path) {
  if (!out_) throw IoError("cannot write " + path);
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_) throw IoError("column count mismatch writing " + path_);
  for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << fmt_g17(values[i]);
  out_ << '\n';
}

void CsvWriter::row(const std::string& label, const std::vector<double>& values) {
  if (values.size() + 1 != columns_) throw IoError("column count mismatch writing " + path_);
  out_ << label;
  for (double v : values) out_ << ',' << fmt_g17(v);
  out_ << '\n';
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw IoError("missing CSV column " + name);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty CSV " + path);
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) t.header.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    while (std::getline(ls, cell, ',')) {
      char* end = nullptr;
      row.push_back(std::strtod(cell.c_str(), &end));
      if (end == cell.c_str()) throw IoError("non-numeric CSV cell '" + cell + "' in " + path);
    }
    if (row.size() != t.header.size()) throw IoError("ragged CSV row in " + path);
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream o(path, std::ios::binary | std::ios::trunc);
  if (!o) throw IoError("cannot write " + path);
  o << text;
  if (!o) throw IoError("write failed for " + path);
}

}  // namespace pmelab
