#include "tabinr/table.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace tabinr {

void TableSchema::validate() const {
  if (columns.empty()) throw std::invalid_argument("schema has no columns");
  std::unordered_set<std::string> seen;
  for (const auto& c : columns) {
    if (!seen.insert(c.name).second)
      throw std::invalid_argument("duplicate column name: " + c.name);
    if (c.kind == ColumnKind::categorical && !c.categories.empty() && c.categories.size() < 2)
      throw std::invalid_argument("categorical column '" + c.name +
                                  "' needs >= 2 declared categories");
    std::unordered_set<std::string> cats(c.categories.begin(), c.categories.end());
    if (cats.size() != c.categories.size())
      throw std::invalid_argument("duplicate category in column: " + c.name);
  }
}

int TableSchema::column_index(const std::string& name) const {
  for (size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == name) return static_cast<int>(i);
  return -1;
}

TableSchema schema_from_json(const std::string& json_text) {
  auto j = nlohmann::ordered_json::parse(json_text);
  if (!j.is_object()) throw std::invalid_argument("schema JSON must be an object");
  TableSchema schema;
  for (auto& [name, spec] : j.items()) {
    Column c;
    c.name = name;
    std::string kind = spec.at("kind").get<std::string>();
    if (kind == "numeric") {
      c.kind = ColumnKind::numeric;
    } else if (kind == "categorical") {
      c.kind = ColumnKind::categorical;
      if (spec.contains("categories"))
        c.categories = spec["categories"].get<std::vector<std::string>>();
    } else {
      throw std::invalid_argument("unknown column kind: " + kind);
    }
    schema.columns.push_back(std::move(c));
  }
  schema.validate();
  return schema;
}

TableSchema schema_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open schema file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return schema_from_json(ss.str());
}

std::string schema_to_json(const TableSchema& schema) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& c : schema.columns) {
    nlohmann::ordered_json spec;
    spec["kind"] = c.kind == ColumnKind::numeric ? "numeric" : "categorical";
    if (c.kind == ColumnKind::categorical) spec["categories"] = c.categories;
    j[c.name] = spec;
  }
  return j.dump(2);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

}  // namespace

EncodedTable load_table(std::istream& csv, const TableSchema& schema_in) {
  schema_in.validate();
  std::string line;
  if (!std::getline(csv, line)) throw std::runtime_error("empty CSV");
  auto header = split_csv_line(line);
  if (header.size() != schema_in.columns.size())
    throw std::runtime_error("header has " + std::to_string(header.size()) +
                             " columns, schema has " + std::to_string(schema_in.columns.size()));
  // Header order wins; every name must come from the schema.
  TableSchema schema;
  for (const auto& h : header) {
    int idx = schema_in.column_index(trim(h));
    if (idx < 0) throw std::runtime_error("header column '" + trim(h) + "' not in schema");
    schema.columns.push_back(schema_in.columns[idx]);
  }
  if (schema.columns.size() != schema_in.columns.size())
    throw std::runtime_error("header/schema mismatch");

  const int m = static_cast<int>(schema.columns.size());
  std::vector<std::vector<std::string>> raw;  // row-major cells
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) != m)
      throw std::runtime_error("row " + std::to_string(raw.size() + 1) + " has " +
                               std::to_string(cells.size()) + " cells, expected " +
                               std::to_string(m));
    raw.push_back(std::move(cells));
  }
  if (raw.empty()) throw std::runtime_error("CSV has no data rows");
  const int n = static_cast<int>(raw.size());

  // Infer categories (first-appearance order) where none are declared.
  std::vector<std::unordered_map<std::string, int>> cat_index(m);
  for (int j = 0; j < m; ++j) {
    auto& col = schema.columns[j];
    if (col.kind != ColumnKind::categorical) continue;
    if (col.categories.empty()) {
      for (int i = 0; i < n; ++i) {
        std::string v = trim(raw[i][j]);
        if (v.empty()) continue;
        if (cat_index[j].emplace(v, static_cast<int>(col.categories.size())).second)
          col.categories.push_back(v);
      }
      if (col.categories.size() < 2)
        throw std::runtime_error("column '" + col.name + "' has < 2 distinct categories");
    } else {
      for (size_t k = 0; k < col.categories.size(); ++k)
        cat_index[j][col.categories[k]] = static_cast<int>(k);
    }
  }

  EncodedTable t;
  t.schema = schema;
  t.groups.resize(m);
  int mp = 0;
  for (int j = 0; j < m; ++j) {
    int width = schema.columns[j].kind == ColumnKind::numeric
                    ? 1
                    : static_cast<int>(schema.columns[j].categories.size());
    for (int k = 0; k < width; ++k) {
      t.groups[j].push_back(mp + k);
      t.col_of.push_back(j);
      t.is_numeric.push_back(schema.columns[j].kind == ColumnKind::numeric);
    }
    mp += width;
  }
  t.values = Matrix::Zero(n, mp);
  t.observed = BoolMask::Constant(n, mp, false);
  t.scale.assign(mp, std::nullopt);

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      std::string cell = trim(raw[i][j]);
      const auto& col = schema.columns[j];
      if (cell.empty()) continue;  // native missing
      if (col.kind == ColumnKind::numeric) {
        size_t pos = 0;
        double v;
        try {
          v = std::stod(cell, &pos);
        } catch (const std::exception&) {
          throw std::runtime_error("non-numeric value '" + cell + "' in column '" + col.name + "'");
        }
        if (pos != cell.size() || !std::isfinite(v))
          throw std::runtime_error("non-numeric value '" + cell + "' in column '" + col.name + "'");
        t.values(i, t.groups[j][0]) = v;
        t.observed(i, t.groups[j][0]) = true;
      } else {
        auto it = cat_index[j].find(cell);
        if (it == cat_index[j].end())
          throw std::runtime_error("unknown category '" + cell + "' in column '" + col.name + "'");
        for (int c : t.groups[j]) t.observed(i, c) = true;
        t.values(i, t.groups[j][it->second]) = 1.0;
      }
    }
  }

  t.row_ids.resize(n);
  std::iota(t.row_ids.begin(), t.row_ids.end(), 0);
  t.group_ids.resize(m);
  std::iota(t.group_ids.begin(), t.group_ids.end(), 0);
  t.col_ids.resize(mp);
  std::iota(t.col_ids.begin(), t.col_ids.end(), 0);
  return t;
}

EncodedTable load_table_file(const std::string& path, const TableSchema& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open data file: " + path);
  return load_table(in, schema);
}

EncodedTable fit_scaling(const EncodedTable& table) {
  EncodedTable t = table;
  for (int j = 0; j < t.cols(); ++j) {
    if (!t.is_numeric[j]) continue;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    int count = 0;
    for (int i = 0; i < t.rows(); ++i) {
      if (!t.observed(i, j)) continue;
      lo = std::min(lo, t.values(i, j));
      hi = std::max(hi, t.values(i, j));
      ++count;
    }
    if (count == 0)
      throw std::runtime_error("numeric column '" +
                               t.schema.columns[t.col_of[j]].name +
                               "' has no observed entries");
    t.scale[j] = NumericScale{lo, hi};
    const double range = hi - lo;
    for (int i = 0; i < t.rows(); ++i) {
      if (!t.observed(i, j)) {
        t.values(i, j) = 0.0;
        continue;
      }
      t.values(i, j) = range > 0 ? (t.values(i, j) - lo) / range : 0.0;
    }
  }
  t.scaled = true;
  return t;
}

Matrix unscale(const EncodedTable& table, const Matrix& values) {
  if (!table.scaled) throw std::runtime_error("table has no scaling metadata");
  if (values.rows() != table.rows() || values.cols() != table.cols())
    throw std::runtime_error("unscale: shape mismatch");
  Matrix out = values;
  for (int j = 0; j < table.cols(); ++j) {
    if (!table.is_numeric[j]) continue;
    const auto& s = *table.scale[j];
    const double range = s.max - s.min;
    for (int i = 0; i < out.rows(); ++i)
      out(i, j) = range > 0 ? out(i, j) * range + s.min : s.min;
  }
  return out;
}

std::vector<std::pair<int, int>> observed_pairs(const EncodedTable& table) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < table.rows(); ++i)
    for (int j = 0; j < table.cols(); ++j)
      if (table.observed(i, j)) out.emplace_back(i, j);
  return out;
}

EncodedTable apply_mask(const EncodedTable& table, const BoolMask& mask) {
  if (mask.rows() != table.rows() || mask.cols() != table.cols())
    throw std::runtime_error("apply_mask: shape mismatch");
  EncodedTable t = table;
  for (int i = 0; i < t.rows(); ++i)
    for (int j = 0; j < t.cols(); ++j)
      if (mask(i, j)) {
        t.observed(i, j) = false;
        t.values(i, j) = 0.0;
      }
  return t;
}

EncodedTable permute_rows(const EncodedTable& table, const std::vector<int>& perm) {
  if (static_cast<int>(perm.size()) != table.rows())
    throw std::invalid_argument("permute_rows: bad permutation size");
  EncodedTable t = table;
  for (int i = 0; i < table.rows(); ++i) {
    t.values.row(i) = table.values.row(perm[i]);
    t.observed.row(i) = table.observed.row(perm[i]);
    t.row_ids[i] = table.row_ids[perm[i]];
  }
  return t;
}

EncodedTable permute_columns(const EncodedTable& table, const std::vector<int>& perm) {
  if (static_cast<int>(perm.size()) != table.original_cols())
    throw std::invalid_argument("permute_columns: bad permutation size");
  EncodedTable t;
  t.scaled = table.scaled;
  t.row_ids = table.row_ids;
  const int m = table.original_cols();
  t.groups.resize(m);
  int mp = 0;
  for (int g = 0; g < m; ++g) {
    int src = perm[g];
    t.schema.columns.push_back(table.schema.columns[src]);
    t.group_ids.push_back(table.group_ids[src]);
    for (int c : table.groups[src]) {
      t.groups[g].push_back(mp);
      t.col_of.push_back(g);
      t.is_numeric.push_back(table.is_numeric[c]);
      t.scale.push_back(table.scale[c]);
      t.col_ids.push_back(table.col_ids[c]);
      ++mp;
    }
  }
  t.values = Matrix::Zero(table.rows(), mp);
  t.observed = BoolMask::Constant(table.rows(), mp, false);
  int dst = 0;
  for (int g = 0; g < m; ++g)
    for (int c : table.groups[perm[g]]) {
      t.values.col(dst) = table.values.col(c);
      t.observed.col(dst) = table.observed.col(c);
      ++dst;
    }
  return t;
}

BoolMask read_mask_csv(std::istream& in, const EncodedTable& table, bool original_shape) {
  const int want_cols = original_shape ? table.original_cols() : static_cast<int>(table.cols());
  std::vector<std::vector<int>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) != want_cols)
      throw std::runtime_error("mask row has wrong width");
    std::vector<int> r;
    for (auto& c : cells) {
      std::string v = trim(c);
      if (v != "0" && v != "1") throw std::runtime_error("mask cells must be 0 or 1");
      r.push_back(v == "1");
    }
    rows.push_back(std::move(r));
  }
  if (static_cast<int>(rows.size()) != table.rows())
    throw std::runtime_error("mask has wrong number of rows");
  BoolMask mask = BoolMask::Constant(table.rows(), table.cols(), false);
  for (int i = 0; i < table.rows(); ++i) {
    if (original_shape) {
      for (int g = 0; g < table.original_cols(); ++g)
        if (rows[i][g])
          for (int c : table.groups[g]) mask(i, c) = true;
    } else {
      for (int j = 0; j < table.cols(); ++j) mask(i, j) = rows[i][j] != 0;
    }
  }
  return mask;
}

void write_mask_csv(std::ostream& out, const BoolMask& mask) {
  for (int i = 0; i < mask.rows(); ++i) {
    for (int j = 0; j < mask.cols(); ++j) {
      if (j) out << ',';
      out << (mask(i, j) ? '1' : '0');
    }
    out << '\n';
  }
}

void write_decoded_csv(std::ostream& out, const EncodedTable& table, const Matrix& completed) {
  const int m = table.original_cols();
  for (int g = 0; g < m; ++g) {
    if (g) out << ',';
    out << table.schema.columns[g].name;
  }
  out << '\n';
  for (int i = 0; i < table.rows(); ++i) {
    for (int g = 0; g < m; ++g) {
      if (g) out << ',';
      const auto& col = table.schema.columns[g];
      if (col.kind == ColumnKind::numeric) {
        std::ostringstream ss;
        ss.precision(17);
        ss << completed(i, table.groups[g][0]);
        out << ss.str();
      } else {
        int best = 0;
        double best_v = completed(i, table.groups[g][0]);
        for (size_t k = 1; k < table.groups[g].size(); ++k) {
          double v = completed(i, table.groups[g][k]);
          if (v > best_v) {
            best_v = v;
            best = static_cast<int>(k);
          }
        }
        out << col.categories[best];
      }
    }
    out << '\n';
  }
}

}  // namespace tabinr
