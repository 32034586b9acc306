#include "thermies/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "thermies/errors.hpp"

namespace thermies {

CovMatrix load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open matrix file: " + path);
  int d = 0;
  if (!(in >> d) || d < 1)
    throw IoError(path + ": first token must be a positive dimension");
  std::vector<double> entries(static_cast<std::size_t>(d) * d);
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (!(in >> entries[k])) {
      std::ostringstream os;
      os << path << ": expected " << d * d << " values, got " << k;
      throw IoError(os.str());
    }
  }
  try {
    return CovMatrix(SymMatrix(d, std::move(entries)));
  } catch (const Error& e) {
    throw IoError(path + ": " + e.what());
  }
}

void store_matrix(const std::string& path, const SymMatrix& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << m.dim() << "\n";
  for (int i = 0; i < m.dim(); ++i) {
    for (int j = 0; j < m.dim(); ++j) {
      if (j) out << ' ';
      out << format_double(m(i, j));
    }
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void CsvWriter::comment(const std::string& line) { os_ << "# " << line << "\n"; }

void CsvWriter::header(const std::vector<std::string>& cols) { row(cols); }

void CsvWriter::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) os_ << ',';
    os_ << cells[i];
  }
  os_ << "\n";
}

void write_batch_csv(std::ostream& os, const SampleBatch& batch,
                     const std::string& provenance) {
  CsvWriter w(os);
  w.comment(provenance);
  std::vector<std::string> cols;
  for (int i = 0; i < batch.dim; ++i) cols.push_back("x" + std::to_string(i));
  cols.push_back("neighbor_index");
  w.header(cols);
  std::vector<std::string> cells(batch.dim + 1);
  for (std::size_t k = 0; k < batch.count; ++k) {
    for (int i = 0; i < batch.dim; ++i)
      cells[i] = format_double(batch.at(k, i));
    cells[batch.dim] = batch.neighbor_index.empty()
                           ? "-1"
                           : std::to_string(batch.neighbor_index[k]);
    w.row(cells);
  }
}

namespace {
constexpr char kBatchMagic[4] = {'T', 'S', 'M', 'B'};
}

void write_batch_binary(const std::string& path, const SampleBatch& batch) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  std::uint32_t d = static_cast<std::uint32_t>(batch.dim);
  std::uint64_t n = batch.count;
  out.write(kBatchMagic, 4);
  out.write(reinterpret_cast<const char*>(&d), 4);
  out.write(reinterpret_cast<const char*>(&n), 8);
  out.write(reinterpret_cast<const char*>(batch.data.data()),
            static_cast<std::streamsize>(batch.data.size() * sizeof(double)));
  if (!out) throw IoError("write failed: " + path);
}

SampleBatch read_batch_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open batch file: " + path);
  char magic[4];
  std::uint32_t d = 0;
  std::uint64_t n = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&d), 4);
  in.read(reinterpret_cast<char*>(&n), 8);
  if (!in || std::memcmp(magic, kBatchMagic, 4) != 0)
    throw IoError(path + ": not a sample batch file");
  SampleBatch batch;
  batch.dim = static_cast<int>(d);
  batch.count = n;
  batch.data.resize(n * d);
  in.read(reinterpret_cast<char*>(batch.data.data()),
          static_cast<std::streamsize>(batch.data.size() * sizeof(double)));
  if (!in) throw IoError(path + ": truncated batch data");
  return batch;
}

}  // namespace thermies
