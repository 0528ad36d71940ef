#include "fairsyn/dataset.hpp"
#include "fairsyn/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace fairsyn {

namespace {

constexpr const char* kMissingLabel = "__NA__";

std::string format_edge(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

bool parse_double(const std::string& s, double& out) {
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    while (begin != end && std::isspace(static_cast<unsigned char>(*begin))) ++begin;
    while (end != begin && std::isspace(static_cast<unsigned char>(*(end - 1)))) --end;
    if (begin == end) return false;
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

} // namespace

std::size_t AttributeDomain::cardinality() const {
    std::size_t base = kind == DomainKind::categorical
                           ? levels.size()
                           : (bin_edges.empty() ? 0 : bin_edges.size() - 1);
    return base + (allow_missing ? 1 : 0);
}

std::string AttributeDomain::level_label(std::size_t code) const {
    std::size_t card = cardinality();
    if (code >= card) throw DomainError("code " + std::to_string(code) + " out of range for attribute " + name);
    if (allow_missing && code == card - 1) return kMissingLabel;
    if (kind == DomainKind::categorical) return levels[code];
    return format_edge(bin_edges[code]) + ".." + format_edge(bin_edges[code + 1]);
}

void AttributeDomain::validate() const {
    if (name.empty()) throw DomainError("attribute with empty name");
    if (kind == DomainKind::categorical) {
        if (levels.empty()) throw DomainError("attribute " + name + ": empty level list");
        std::unordered_set<std::string> seen;
        for (const auto& l : levels) {
            if (l == kMissingLabel)
                throw DomainError("attribute " + name + ": level " + kMissingLabel + " is reserved");
            if (!seen.insert(l).second)
                throw DomainError("attribute " + name + ": duplicate level " + l);
        }
    } else {
        if (bin_edges.size() < 2) throw DomainError("attribute " + name + ": needs at least two bin edges");
        for (std::size_t i = 1; i < bin_edges.size(); ++i) {
            if (!(bin_edges[i] > bin_edges[i - 1]))
                throw DomainError("attribute " + name + ": bin edges not strictly increasing");
        }
    }
}

EncodedDatabase::EncodedDatabase(std::vector<AttributeDomain> domains, std::vector<std::uint32_t> codes)
    : domains_(std::move(domains)), codes_(std::move(codes)) {
    if (domains_.empty()) {
        if (!codes_.empty()) throw DomainError("codes without domains");
        return;
    }
    if (codes_.size() % domains_.size() != 0)
        throw DomainError("code matrix size is not a multiple of the attribute count");
    for (std::size_t a = 0; a < domains_.size(); ++a) {
        std::uint32_t card = static_cast<std::uint32_t>(domains_[a].cardinality());
        for (std::size_t r = 0; r < row_count(); ++r) {
            if (codes_[r * domains_.size() + a] >= card)
                throw DomainError("row " + std::to_string(r) + ": code out of range for attribute " +
                                  domains_[a].name);
        }
    }
}

std::size_t EncodedDatabase::attribute_index(std::string_view name) const {
    for (std::size_t i = 0; i < domains_.size(); ++i)
        if (domains_[i].name == name) return i;
    throw MissingColumn("unknown attribute: " + std::string(name));
}

DatabaseBuilder::DatabaseBuilder(std::vector<AttributeDomain> domains) : domains_(std::move(domains)) {
    for (const auto& d : domains_) d.validate();
}

void DatabaseBuilder::add_row(const std::vector<std::uint32_t>& codes) {
    if (codes.size() != domains_.size()) throw DomainError("row width does not match attribute count");
    for (std::size_t a = 0; a < codes.size(); ++a) {
        if (codes[a] >= domains_[a].cardinality())
            throw DomainError("code out of range for attribute " + domains_[a].name);
    }
    codes_.insert(codes_.end(), codes.begin(), codes.end());
}

EncodedDatabase DatabaseBuilder::build() && {
    return EncodedDatabase(std::move(domains_), std::move(codes_));
}

std::vector<AttributeDomain> parse_schema(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("schema: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("attributes") || !doc["attributes"].is_array())
        throw ParseError("schema: expected object with an \"attributes\" array");

    std::vector<AttributeDomain> domains;
    std::unordered_set<std::string> names;
    for (const auto& item : doc["attributes"]) {
        AttributeDomain d;
        try {
            d.name = item.at("name").get<std::string>();
            std::string kind = item.at("kind").get<std::string>();
            if (kind == "categorical") {
                d.kind = DomainKind::categorical;
                d.levels = item.at("levels").get<std::vector<std::string>>();
            } else if (kind == "numeric") {
                d.kind = DomainKind::numeric_binned;
                if (item.contains("bin_edges")) {
                    d.bin_edges = item.at("bin_edges").get<std::vector<double>>();
                } else if (item.contains("equal_width")) {
                    const auto& ew = item.at("equal_width");
                    double lo = ew.at("min").get<double>();
                    double hi = ew.at("max").get<double>();
                    std::size_t k = ew.value("bins", std::size_t{10});
                    if (k == 0) throw DomainError("attribute " + d.name + ": equal_width needs bins >= 1");
                    if (!(hi > lo)) throw DomainError("attribute " + d.name + ": equal_width needs max > min");
                    d.bin_edges.reserve(k + 1);
                    for (std::size_t i = 0; i <= k; ++i)
                        d.bin_edges.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(k));
                } else {
                    throw ParseError("attribute " + d.name + ": numeric needs bin_edges or equal_width");
                }
            } else {
                throw ParseError("attribute " + d.name + ": unknown kind " + kind);
            }
            d.allow_missing = item.value("allow_missing", false);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("schema: ") + e.what());
        }
        d.validate();
        if (!names.insert(d.name).second) throw DomainError("duplicate attribute name: " + d.name);
        domains.push_back(std::move(d));
    }
    if (domains.empty()) throw DomainError("schema declares no attributes");
    return domains;
}

std::vector<AttributeDomain> load_schema(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open schema file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_schema(ss.str());
}

std::vector<std::vector<std::string>> read_csv_rows(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open CSV file: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string cell;
    bool in_quotes = false;
    bool row_started = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cell += c;
            }
            continue;
        }
        switch (c) {
        case '"':
            in_quotes = true;
            row_started = true;
            break;
        case ',':
            row.push_back(std::move(cell));
            cell.clear();
            row_started = true;
            break;
        case '\r':
            break;
        case '\n':
            if (row_started || !cell.empty() || !row.empty()) {
                row.push_back(std::move(cell));
                cell.clear();
                rows.push_back(std::move(row));
                row.clear();
                row_started = false;
            }
            break;
        default:
            cell += c;
            row_started = true;
            break;
        }
    }
    if (in_quotes) throw ParseError(path.string() + ": unterminated quote");
    if (row_started || !cell.empty() || !row.empty()) {
        row.push_back(std::move(cell));
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

std::uint32_t encode_cell(const AttributeDomain& d, const std::string& raw, std::size_t row_no) {
    std::string where = "row " + std::to_string(row_no) + ", attribute " + d.name;
    if (raw.empty() || raw == kMissingLabel) {
        if (d.allow_missing) return static_cast<std::uint32_t>(d.cardinality() - 1);
        throw UnknownValue(where + ": missing value but domain does not allow missing");
    }
    if (d.kind == DomainKind::categorical) {
        for (std::size_t i = 0; i < d.levels.size(); ++i)
            if (d.levels[i] == raw) return static_cast<std::uint32_t>(i);
        throw UnknownValue(where + ": value \"" + raw + "\" not in declared levels");
    }
    // Numeric: accept a bin label round-tripped from write_csv, else parse.
    std::size_t bins = d.bin_edges.size() - 1;
    for (std::size_t i = 0; i < bins; ++i) {
        if (raw == format_edge(d.bin_edges[i]) + ".." + format_edge(d.bin_edges[i + 1]))
            return static_cast<std::uint32_t>(i);
    }
    double v = 0.0;
    if (!parse_double(raw, v)) throw UnknownValue(where + ": cannot parse numeric value \"" + raw + "\"");
    if (v < d.bin_edges.front() || v > d.bin_edges.back())
        throw OutOfRange(where + ": value " + raw + " outside [" + format_edge(d.bin_edges.front()) + ", " +
                         format_edge(d.bin_edges.back()) + "]");
    // Half-open bins [e_i, e_{i+1}); the last bin is closed.
    if (v == d.bin_edges.back()) return static_cast<std::uint32_t>(bins - 1);
    std::size_t lo = 0, hi = bins;
    while (lo + 1 < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (v >= d.bin_edges[mid]) lo = mid; else hi = mid;
    }
    return static_cast<std::uint32_t>(lo);
}

} // namespace

EncodedDatabase encode_csv(const std::filesystem::path& path, const std::vector<AttributeDomain>& domains) {
    for (const auto& d : domains) d.validate();
    auto rows = read_csv_rows(path);
    if (rows.empty()) throw ParseError(path.string() + ": missing header row");

    const auto& header = rows.front();
    std::vector<std::size_t> column_of(domains.size());
    for (std::size_t a = 0; a < domains.size(); ++a) {
        auto it = std::find(header.begin(), header.end(), domains[a].name);
        if (it == header.end()) throw MissingColumn(path.string() + ": no column named " + domains[a].name);
        column_of[a] = static_cast<std::size_t>(it - header.begin());
    }

    DatabaseBuilder builder(domains);
    std::vector<std::uint32_t> codes(domains.size());
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        for (std::size_t a = 0; a < domains.size(); ++a) {
            if (column_of[a] >= row.size())
                throw ParseError(path.string() + ": row " + std::to_string(r) + " has too few cells");
            codes[a] = encode_cell(domains[a], row[column_of[a]], r);
        }
        builder.add_row(codes);
    }
    return std::move(builder).build();
}

std::string decode_cell(const AttributeDomain& domain, std::uint32_t code) {
    return domain.level_label(code);
}

namespace {

void write_csv_cell(std::ostream& out, const std::string& value) {
    if (value.find_first_of(",\"\n") == std::string::npos) {
        out << value;
        return;
    }
    out << '"';
    for (char c : value) {
        if (c == '"') out << "\"\"";
        else out << c;
    }
    out << '"';
}

} // namespace

void write_csv(const EncodedDatabase& db, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open for writing: " + path.string());
    const auto& domains = db.domains();
    for (std::size_t a = 0; a < domains.size(); ++a) {
        if (a) out << ',';
        write_csv_cell(out, domains[a].name);
    }
    out << '\n';
    for (std::size_t r = 0; r < db.row_count(); ++r) {
        for (std::size_t a = 0; a < domains.size(); ++a) {
            if (a) out << ',';
            write_csv_cell(out, decode_cell(domains[a], db.code(r, a)));
        }
        out << '\n';
    }
}

} // namespace fairsyn
