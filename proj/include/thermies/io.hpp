#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "thermies/sampler.hpp"
#include "thermies/sym_matrix.hpp"

namespace thermies {

/// Matrix text format used repo-wide: line 1 holds the integer dimension d,
/// the next d lines hold d whitespace-separated decimal values. Symmetry and
/// PSD-ness are enforced on load.
CovMatrix load_matrix(const std::string& path);

/// Writes with 17 significant digits so a load round-trips bit-exactly.
void store_matrix(const std::string& path, const SymMatrix& m);

/// Shortest-faithful decimal formatting (17 significant digits).
std::string format_double(double v);

/// CSV writing: a '#'-prefixed provenance comment line first, then a header
/// row, then data rows. LF line endings, deterministic bytes.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}
  void comment(const std::string& line);
  void header(const std::vector<std::string>& cols);
  void row(const std::vector<std::string>& cells);

 private:
  std::ostream& os_;
};

/// One row per sample: x0,...,x{d-1},neighbor_index (-1 when untracked).
void write_batch_csv(std::ostream& os, const SampleBatch& batch,
                     const std::string& provenance);

/// Binary export: 16-byte header (magic 'TSMB', u32 dim, u64 count) then
/// count*dim little-endian doubles, row-major.
void write_batch_binary(const std::string& path, const SampleBatch& batch);
SampleBatch read_batch_binary(const std::string& path);

}  // namespace thermies
