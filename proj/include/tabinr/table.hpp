#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace tabinr {

using Matrix = Eigen::MatrixXd;
using BoolMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

enum class ColumnKind { numeric, categorical };

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  std::vector<std::string> categories;  // categorical only; empty = infer from data
};

struct TableSchema {
  std::vector<Column> columns;

  void validate() const;  // throws std::invalid_argument
  int column_index(const std::string& name) const;  // -1 if absent
};

TableSchema schema_from_json(const std::string& json_text);
TableSchema schema_from_json_file(const std::string& path);
std::string schema_to_json(const TableSchema& schema);

struct NumericScale {
  double min = 0.0;
  double max = 0.0;
};

// A mixed-type table after one-hot expansion. Immutable once built.
struct EncodedTable {
  Matrix values;    // n x m'
  BoolMask observed;
  TableSchema schema;  // with concrete categories
  std::vector<std::vector<int>> groups;  // per original column: expanded indices
  std::vector<int> col_of;               // expanded col -> original column
  std::vector<bool> is_numeric;          // per expanded col
  std::vector<std::optional<NumericScale>> scale;  // per expanded col, set after fit_scaling
  bool scaled = false;

  // Original identities, for permutation-aware seeding. Default identity maps.
  std::vector<std::uint64_t> row_ids;       // per row
  std::vector<std::uint64_t> group_ids;     // per original column
  std::vector<std::uint64_t> col_ids;       // per expanded col

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }  // m'
  int original_cols() const { return static_cast<int>(groups.size()); }
  bool group_observed(Eigen::Index row, int orig_col) const {
    return observed(row, groups[orig_col].front());
  }
};

struct MaskPair {
  BoolMask mask;  // n x m', true = artificially missing
  Matrix truth;   // ground-truth values at masked cells, 0 elsewhere
};

// CSV ingestion. Header row must match schema names; empty cell = missing.
EncodedTable load_table(std::istream& csv, const TableSchema& schema);
EncodedTable load_table_file(const std::string& path, const TableSchema& schema);

// Min-max scaling of numeric columns from observed entries only.
// Constant column maps to 0 and inverts to the constant.
EncodedTable fit_scaling(const EncodedTable& table);

// Inverse of fit_scaling on numeric columns; one-hot columns pass through.
Matrix unscale(const EncodedTable& table, const Matrix& values);

// Observed cells in row-major order.
std::vector<std::pair<int, int>> observed_pairs(const EncodedTable& table);

// Hide the masked cells of `pair` (group units already expanded in the mask).
EncodedTable apply_mask(const EncodedTable& table, const BoolMask& mask);

// Reorder rows / original columns; identity ids travel with the data.
EncodedTable permute_rows(const EncodedTable& table, const std::vector<int>& perm);
EncodedTable permute_columns(const EncodedTable& table, const std::vector<int>& perm);

// Mask file IO: CSV of 0/1, expanded shape or original shape (group-expanded on read).
BoolMask read_mask_csv(std::istream& in, const EncodedTable& table, bool original_shape);
void write_mask_csv(std::ostream& out, const BoolMask& mask);

// Decode a completed expanded matrix back to original-column CSV text.
void write_decoded_csv(std::ostream& out, const EncodedTable& table, const Matrix& completed);

}  // namespace tabinr
