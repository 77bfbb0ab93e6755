#ifndef EVENTCHRON_DATASET_HPP
#define EVENTCHRON_DATASET_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace eventchron::data {

/// One observation of a binary event in one read.
enum class Cell : std::uint8_t { Zero = 0, One = 1, Missing = 2 };

/// Reads x events matrix of ternary cells. Immutable after construction.
///
/// Column order is significant: it is the default variable order used for
/// deterministic tie-breaking by every learner downstream.
class EventMatrix {
public:
    /// Cells are row-major, `cells.size() == n_rows * columns.size()`.
    EventMatrix(std::vector<std::string> columns, std::size_t n_rows, std::vector<Cell> cells,
                std::string provenance = {});

    /// Builds a complete matrix from 0/1 columns (column-major input).
    static EventMatrix from_columns(std::vector<std::string> columns,
                                    const std::vector<std::vector<std::uint8_t>>& values,
                                    std::string provenance = {});

    std::size_t rows() const { return n_rows_; }
    std::size_t cols() const { return columns_.size(); }
    const std::vector<std::string>& columns() const { return columns_; }
    const std::string& provenance() const { return provenance_; }

    Cell at(std::size_t r, std::size_t c) const { return cells_[r * columns_.size() + c]; }
    std::span<const Cell> row(std::size_t r) const {
        return {cells_.data() + r * columns_.size(), columns_.size()};
    }
    const std::vector<Cell>& cells() const { return cells_; }

    std::optional<std::size_t> find_column(const std::string& label) const;
    /// Throws ValidationError on unknown labels.
    std::size_t column_index(const std::string& label) const;

    bool is_complete() const;
    std::size_t missing_count() const;

    /// Column `c` as 0/1 bytes. Throws if the column has missing cells.
    std::vector<std::uint8_t> binary_column(std::size_t c) const;

    /// Copy with some cells replaced; the label set is unchanged.
    EventMatrix with_cells(std::vector<Cell> cells) const;
    /// Copy restricted to `row_indices`, in that order.
    EventMatrix select_rows(std::span<const std::size_t> row_indices) const;
    /// Copy with columns reordered or subset by label.
    EventMatrix select_columns(const std::vector<std::string>& labels) const;

    bool operator==(const EventMatrix& other) const {
        return columns_ == other.columns_ && n_rows_ == other.n_rows_ && cells_ == other.cells_;
    }

private:
    std::vector<std::string> columns_;
    std::size_t n_rows_;
    std::vector<Cell> cells_;
    std::string provenance_;
};

/// Three disjoint token sets. The first token of each set is its canonical
/// spelling on output.
struct TokenSchema {
    std::vector<std::string> one_tokens{"True"};
    std::vector<std::string> zero_tokens{"False", "Err"};
    std::vector<std::string> missing_tokens{"NaN", ""};

    static TokenSchema defaults() { return {}; }
    /// Parses "1=1,0=0,?=missing" style specifications.
    static TokenSchema parse(const std::string& spec);

    /// Throws ValidationError when sets overlap or a set is empty.
    void validate() const;
    std::optional<Cell> lookup(const std::string& token) const;
    const std::string& canonical(Cell c) const;
};

/// Loads a delimited text table; the delimiter (comma or tab) is detected
/// from the header line. Nanopore error tokens map to 0 here, before any
/// statistics are computed.
EventMatrix load_reads(const std::filesystem::path& path, const TokenSchema& schema = {});
EventMatrix parse_reads(std::istream& in, const TokenSchema& schema = {}, std::string provenance = {});

/// Writes canonical tokens; `load_reads` of the output is bit-identical.
void write_reads(std::ostream& out, const EventMatrix& m, const TokenSchema& schema = {},
                 char delimiter = ',');
void save_reads(const std::filesystem::path& path, const EventMatrix& m,
                const TokenSchema& schema = {}, char delimiter = ',');

/// 2x2 counts over rows where both variables are observed.
/// n01 counts rows with a = 0 and b = 1.
struct ContingencyTable {
    std::string a;
    std::string b;
    std::size_t n00 = 0;
    std::size_t n01 = 0;
    std::size_t n10 = 0;
    std::size_t n11 = 0;

    std::size_t total() const { return n00 + n01 + n10 + n11; }
    bool operator==(const ContingencyTable&) const = default;
};

/// A degenerate table (total 0) is returned rather than raised.
ContingencyTable contingency(const EventMatrix& m, const std::string& a, const std::string& b);
ContingencyTable contingency(const EventMatrix& m, std::size_t a, std::size_t b);

/// Over fully observed rows with target = 1: the number of rows for each set
/// of other columns that are also 1. Keys list labels in column order; the
/// empty key counts rows where the target occurs alone.
std::map<std::vector<std::string>, std::size_t> cooccurrence_counts(const EventMatrix& m,
                                                                    const std::string& target);

struct MissingnessProfile {
    std::vector<std::string> columns;
    std::vector<double> missing_fraction;     // per column
    std::vector<std::size_t> missing_runs;    // per row, maximal contiguous runs
    std::vector<bool> single_block;           // per row, runs <= 1
    std::size_t fully_observed_rows = 0;

    double single_block_fraction() const;
    /// {columns: [{label, missing_fraction}], rows_fully_observed, rows_single_block_fraction}
    std::string to_json() const;
};

MissingnessProfile missingness_profile(const EventMatrix& m);

/// Drops the named columns; throws on unknown labels or if nothing would remain.
EventMatrix exclude_events(const EventMatrix& m, const std::vector<std::string>& names);

}  // namespace eventchron::data

#endif  // EVENTCHRON_DATASET_HPP
