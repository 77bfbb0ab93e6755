#include "eventchron/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eventchron/error.hpp"

namespace eventchron::data {

namespace {

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, delim)) out.push_back(field);
    if (!line.empty() && line.back() == delim) out.emplace_back();
    if (line.empty()) out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

}  // namespace

EventMatrix::EventMatrix(std::vector<std::string> columns, std::size_t n_rows, std::vector<Cell> cells,
                         std::string provenance)
    : columns_(std::move(columns)), n_rows_(n_rows), cells_(std::move(cells)), provenance_(std::move(provenance)) {
    if (columns_.empty()) throw ValidationError("empty matrix: no columns");
    if (n_rows_ == 0) throw ValidationError("no rows");
    if (cells_.size() != n_rows_ * columns_.size()) {
        throw ValidationError("cell count does not match rows x columns");
    }
    std::set<std::string> seen;
    for (const auto& c : columns_) {
        if (c.empty()) throw ValidationError("empty column label");
        if (!seen.insert(c).second) throw ValidationError("duplicate column label '" + c + "'");
    }
    for (Cell c : cells_) {
        if (c != Cell::Zero && c != Cell::One && c != Cell::Missing) {
            throw ValidationError("invalid cell state");
        }
    }
}

EventMatrix EventMatrix::from_columns(std::vector<std::string> columns,
                                      const std::vector<std::vector<std::uint8_t>>& values,
                                      std::string provenance) {
    if (values.size() != columns.size()) throw ValidationError("column count mismatch");
    const std::size_t n = values.empty() ? 0 : values.front().size();
    std::vector<Cell> cells(n * columns.size());
    for (std::size_t c = 0; c < values.size(); ++c) {
        if (values[c].size() != n) throw ValidationError("ragged columns");
        for (std::size_t r = 0; r < n; ++r) {
            cells[r * columns.size() + c] = values[c][r] ? Cell::One : Cell::Zero;
        }
    }
    return EventMatrix(std::move(columns), n, std::move(cells), std::move(provenance));
}

std::optional<std::size_t> EventMatrix::find_column(const std::string& label) const {
    auto it = std::find(columns_.begin(), columns_.end(), label);
    if (it == columns_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - columns_.begin());
}

std::size_t EventMatrix::column_index(const std::string& label) const {
    if (auto i = find_column(label)) return *i;
    throw ValidationError("unknown label '" + label + "'");
}

bool EventMatrix::is_complete() const {
    return std::none_of(cells_.begin(), cells_.end(), [](Cell c) { return c == Cell::Missing; });
}

std::size_t EventMatrix::missing_count() const {
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), Cell::Missing));
}

std::vector<std::uint8_t> EventMatrix::binary_column(std::size_t c) const {
    std::vector<std::uint8_t> out(n_rows_);
    for (std::size_t r = 0; r < n_rows_; ++r) {
        const Cell v = at(r, c);
        if (v == Cell::Missing) {
            throw ValidationError("column '" + columns_[c] + "' has missing cells");
        }
        out[r] = v == Cell::One ? 1 : 0;
    }
    return out;
}

EventMatrix EventMatrix::with_cells(std::vector<Cell> cells) const {
    return EventMatrix(columns_, n_rows_, std::move(cells), provenance_);
}

EventMatrix EventMatrix::select_rows(std::span<const std::size_t> row_indices) const {
    std::vector<Cell> cells;
    cells.reserve(row_indices.size() * cols());
    for (std::size_t r : row_indices) {
        if (r >= n_rows_) throw ValidationError("row index out of range");
        auto rw = row(r);
        cells.insert(cells.end(), rw.begin(), rw.end());
    }
    return EventMatrix(columns_, row_indices.size(), std::move(cells), provenance_);
}

EventMatrix EventMatrix::select_columns(const std::vector<std::string>& labels) const {
    std::vector<std::size_t> idx;
    idx.reserve(labels.size());
    for (const auto& l : labels) idx.push_back(column_index(l));
    std::vector<Cell> cells;
    cells.reserve(n_rows_ * idx.size());
    for (std::size_t r = 0; r < n_rows_; ++r) {
        for (std::size_t c : idx) cells.push_back(at(r, c));
    }
    return EventMatrix(labels, n_rows_, std::move(cells), provenance_);
}

TokenSchema TokenSchema::parse(const std::string& spec) {
    TokenSchema schema;
    schema.one_tokens.clear();
    schema.zero_tokens.clear();
    schema.missing_tokens.clear();
    for (const auto& item : split(spec, ',')) {
        const auto eq = item.rfind('=');
        if (eq == std::string::npos) throw ValidationError("schema entry '" + item + "' lacks '='");
        const std::string token = item.substr(0, eq);
        const std::string state = trim(item.substr(eq + 1));
        if (state == "1") {
            schema.one_tokens.push_back(token);
        } else if (state == "0") {
            schema.zero_tokens.push_back(token);
        } else if (state == "missing" || state == "nan" || state == "NA") {
            schema.missing_tokens.push_back(token);
        } else {
            throw ValidationError("schema state '" + state + "' is not one of 1, 0, missing");
        }
    }
    schema.validate();
    return schema;
}

void TokenSchema::validate() const {
    if (one_tokens.empty() || zero_tokens.empty() || missing_tokens.empty()) {
        throw ValidationError("token schema needs at least one token per state");
    }
    std::set<std::string> all;
    for (const auto* set : {&one_tokens, &zero_tokens, &missing_tokens}) {
        for (const auto& t : *set) {
            if (!all.insert(t).second) throw ValidationError("token '" + t + "' appears in two states");
        }
    }
}

std::optional<Cell> TokenSchema::lookup(const std::string& token) const {
    const auto has = [&](const std::vector<std::string>& v) {
        return std::find(v.begin(), v.end(), token) != v.end();
    };
    if (has(one_tokens)) return Cell::One;
    if (has(zero_tokens)) return Cell::Zero;
    if (has(missing_tokens)) return Cell::Missing;
    return std::nullopt;
}

const std::string& TokenSchema::canonical(Cell c) const {
    switch (c) {
        case Cell::One: return one_tokens.front();
        case Cell::Zero: return zero_tokens.front();
        case Cell::Missing: break;
    }
    return missing_tokens.front();
}

EventMatrix parse_reads(std::istream& in, const TokenSchema& schema, std::string provenance) {
    schema.validate();
    std::string header;
    if (!std::getline(in, header)) throw ValidationError("no header row");
    if (!header.empty() && header.back() == '\r') header.pop_back();
    const char delim = header.find('\t') != std::string::npos ? '\t' : ',';

    std::vector<std::string> columns;
    for (auto& f : split(header, delim)) columns.push_back(trim(f));
    std::set<std::string> seen;
    for (const auto& c : columns) {
        if (c.empty()) throw ValidationError("empty column label in header");
        if (!seen.insert(c).second) throw ValidationError("duplicate column label '" + c + "'");
    }

    std::vector<Cell> cells;
    std::size_t n_rows = 0;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && columns.size() > 1) continue;
        auto fields = split(line, delim);
        if (fields.size() != columns.size()) {
            throw ValidationError("line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(columns.size()) + " fields, found " +
                                  std::to_string(fields.size()));
        }
        for (std::size_t c = 0; c < fields.size(); ++c) {
            const std::string token = trim(fields[c]);
            auto cell = schema.lookup(token);
            if (!cell) {
                throw ValidationError("unknown token '" + token + "' at row " + std::to_string(n_rows + 1) +
                                      ", column '" + columns[c] + "'");
            }
            cells.push_back(*cell);
        }
        ++n_rows;
    }
    if (n_rows == 0) throw ValidationError("no rows");
    return EventMatrix(std::move(columns), n_rows, std::move(cells), std::move(provenance));
}

EventMatrix load_reads(const std::filesystem::path& path, const TokenSchema& schema) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read '" + path.string() + "'");
    return parse_reads(in, schema, path.string());
}

void write_reads(std::ostream& out, const EventMatrix& m, const TokenSchema& schema, char delimiter) {
    const auto& cols = m.columns();
    for (std::size_t c = 0; c < cols.size(); ++c) {
        if (c) out << delimiter;
        out << cols[c];
    }
    out << '\n';
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (c) out << delimiter;
            out << schema.canonical(m.at(r, c));
        }
        out << '\n';
    }
}

void save_reads(const std::filesystem::path& path, const EventMatrix& m, const TokenSchema& schema,
                char delimiter) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write '" + path.string() + "'");
    write_reads(out, m, schema, delimiter);
}

ContingencyTable contingency(const EventMatrix& m, std::size_t a, std::size_t b) {
    if (a == b) throw ValidationError("contingency needs two distinct columns");
    ContingencyTable t{m.columns().at(a), m.columns().at(b)};
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const Cell va = m.at(r, a);
        const Cell vb = m.at(r, b);
        if (va == Cell::Missing || vb == Cell::Missing) continue;
        if (va == Cell::Zero) {
            (vb == Cell::Zero ? t.n00 : t.n01)++;
        } else {
            (vb == Cell::Zero ? t.n10 : t.n11)++;
        }
    }
    return t;
}

ContingencyTable contingency(const EventMatrix& m, const std::string& a, const std::string& b) {
    if (a == b) throw ValidationError("contingency needs two distinct columns");
    return contingency(m, m.column_index(a), m.column_index(b));
}

std::map<std::vector<std::string>, std::size_t> cooccurrence_counts(const EventMatrix& m,
                                                                    const std::string& target) {
    const std::size_t t = m.column_index(target);
    std::map<std::vector<std::string>, std::size_t> counts;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto row = m.row(r);
        if (std::find(row.begin(), row.end(), Cell::Missing) != row.end()) continue;
        if (row[t] != Cell::One) continue;
        std::vector<std::string> key;
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c != t && row[c] == Cell::One) key.push_back(m.columns()[c]);
        }
        ++counts[key];
    }
    return counts;
}

double MissingnessProfile::single_block_fraction() const {
    if (single_block.empty()) return 0.0;
    const auto n = std::count(single_block.begin(), single_block.end(), true);
    return static_cast<double>(n) / static_cast<double>(single_block.size());
}

std::string MissingnessProfile::to_json() const {
    nlohmann::ordered_json doc;
    doc["columns"] = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < columns.size(); ++c) {
        doc["columns"].push_back({{"label", columns[c]}, {"missing_fraction", missing_fraction[c]}});
    }
    doc["rows_fully_observed"] = fully_observed_rows;
    doc["rows_single_block_fraction"] = single_block_fraction();
    return doc.dump(2);
}

MissingnessProfile missingness_profile(const EventMatrix& m) {
    MissingnessProfile p;
    p.columns = m.columns();
    p.missing_fraction.assign(m.cols(), 0.0);
    p.missing_runs.assign(m.rows(), 0);
    p.single_block.assign(m.rows(), true);
    std::vector<std::size_t> missing_per_col(m.cols(), 0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto row = m.row(r);
        std::size_t runs = 0;
        bool in_run = false;
        for (std::size_t c = 0; c < row.size(); ++c) {
            const bool miss = row[c] == Cell::Missing;
            if (miss) {
                ++missing_per_col[c];
                if (!in_run) ++runs;
            }
            in_run = miss;
        }
        p.missing_runs[r] = runs;
        p.single_block[r] = runs <= 1;
        if (runs == 0) ++p.fully_observed_rows;
    }
    for (std::size_t c = 0; c < m.cols(); ++c) {
        p.missing_fraction[c] = static_cast<double>(missing_per_col[c]) / static_cast<double>(m.rows());
    }
    return p;
}

EventMatrix exclude_events(const EventMatrix& m, const std::vector<std::string>& names) {
    std::set<std::string> drop;
    for (const auto& n : names) {
        m.column_index(n);
        drop.insert(n);
    }
    std::vector<std::string> keep;
    for (const auto& c : m.columns()) {
        if (!drop.count(c)) keep.push_back(c);
    }
    if (keep.empty()) throw ValidationError("empty matrix: every column excluded");
    return m.select_columns(keep);
}

}  // namespace eventchron::data
