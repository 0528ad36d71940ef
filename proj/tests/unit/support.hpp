#pragma once

#include "fairsyn/dataset.hpp"
#include "fairsyn/rng.hpp"

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace testsupport {

// Scratch directory under the system temp root, removed on destruction.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("fairsyn_test_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }

    std::filesystem::path file(const std::string& name, const std::string& content) const {
        auto p = path / name;
        std::ofstream out(p, std::ios::binary);
        out << content;
        return p;
    }
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// d binary attributes named a0..a{d-1}.
inline std::vector<fairsyn::AttributeDomain> binary_domains(std::size_t d) {
    std::vector<fairsyn::AttributeDomain> domains;
    for (std::size_t i = 0; i < d; ++i) {
        fairsyn::AttributeDomain dom;
        dom.name = "a" + std::to_string(i);
        dom.kind = fairsyn::DomainKind::categorical;
        dom.levels = {"0", "1"};
        domains.push_back(std::move(dom));
    }
    return domains;
}

inline std::vector<fairsyn::AttributeDomain> domains_with_cards(const std::vector<std::size_t>& cards) {
    std::vector<fairsyn::AttributeDomain> domains;
    for (std::size_t i = 0; i < cards.size(); ++i) {
        fairsyn::AttributeDomain dom;
        dom.name = "a" + std::to_string(i);
        dom.kind = fairsyn::DomainKind::categorical;
        for (std::size_t l = 0; l < cards[i]; ++l) dom.levels.push_back("v" + std::to_string(l));
        domains.push_back(std::move(dom));
    }
    return domains;
}

// Random database with the given per-attribute cardinalities.
inline fairsyn::EncodedDatabase random_db(const std::vector<std::size_t>& cards, std::size_t rows,
                                          fairsyn::RandomStream& rng) {
    fairsyn::DatabaseBuilder builder(domains_with_cards(cards));
    std::vector<std::uint32_t> row(cards.size());
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t a = 0; a < cards.size(); ++a)
            row[a] = static_cast<std::uint32_t>(rng.next_below(cards[a]));
        builder.add_row(row);
    }
    return std::move(builder).build();
}

} // namespace testsupport
