#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fairsyn {

enum class DomainKind { categorical, numeric_binned };

// The value space of one attribute: either an ordered list of categorical
// levels or a strictly increasing list of bin edges. Each row cell is encoded
// as an index below cardinality(). With allow_missing, a reserved "__NA__"
// level is appended as the last code.
struct AttributeDomain {
    std::string name;
    DomainKind kind = DomainKind::categorical;
    std::vector<std::string> levels;    // categorical only
    std::vector<double> bin_edges;      // numeric only, size = bins + 1
    bool allow_missing = false;

    std::size_t cardinality() const;

    // Label for a code: the level string, "lo..hi" for a bin, or "__NA__".
    std::string level_label(std::size_t code) const;

    // Checks level uniqueness / edge monotonicity; throws DomainError.
    void validate() const;
};

// Integer-coded row store. Immutable after construction and safe to read
// from many threads.
class EncodedDatabase {
public:
    EncodedDatabase() = default;
    EncodedDatabase(std::vector<AttributeDomain> domains, std::vector<std::uint32_t> codes);

    std::size_t row_count() const { return domains_.empty() ? 0 : codes_.size() / domains_.size(); }
    std::size_t attribute_count() const { return domains_.size(); }
    const std::vector<AttributeDomain>& domains() const { return domains_; }

    std::uint32_t code(std::size_t row, std::size_t attr) const {
        return codes_[row * domains_.size() + attr];
    }

    // Index of the named attribute; throws MissingColumn when absent.
    std::size_t attribute_index(std::string_view name) const;

private:
    std::vector<AttributeDomain> domains_;
    std::vector<std::uint32_t> codes_; // row-major
};

// Builds EncodedDatabase row by row; validates codes against the domains.
class DatabaseBuilder {
public:
    explicit DatabaseBuilder(std::vector<AttributeDomain> domains);
    void add_row(const std::vector<std::uint32_t>& codes);
    EncodedDatabase build() &&;

private:
    std::vector<AttributeDomain> domains_;
    std::vector<std::uint32_t> codes_;
};

// Schema file: JSON {"attributes":[{"name":..., "kind":"categorical"|"numeric",
// "levels":[...] | "bin_edges":[...] | "equal_width":{"min":..,"max":..,"bins":k},
// "allow_missing": bool}]}.
std::vector<AttributeDomain> load_schema(const std::filesystem::path& path);

// Parses a schema from JSON text (same format as load_schema).
std::vector<AttributeDomain> parse_schema(const std::string& json_text);

// Encodes a UTF-8 CSV with a header row. Every domain name must appear in the
// header; extra CSV columns are ignored. Numeric cells use half-open bins
// [e_i, e_{i+1}) with the last bin closed; a numeric cell may also be a bin
// label "lo..hi" produced by write_csv. Empty cells and "__NA__" map to the
// missing code when the domain opts in.
EncodedDatabase encode_csv(const std::filesystem::path& path,
                           const std::vector<AttributeDomain>& domains);

// Writes the database back out in the original vocabulary (bins as "lo..hi").
void write_csv(const EncodedDatabase& db, const std::filesystem::path& path);

// Decodes one cell to its label; inverse of the cell encoding up to binning.
std::string decode_cell(const AttributeDomain& domain, std::uint32_t code);

// Raw CSV reader (RFC-4180 quoting); exposed for prediction files.
std::vector<std::vector<std::string>> read_csv_rows(const std::filesystem::path& path);

} // namespace fairsyn
