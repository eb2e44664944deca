#include "kcmlab/csv.hpp"

#include <charconv>
#include <cstdio>

namespace kcmlab {

CsvWriter::CsvWriter(std::ostream& out, std::string config_string, std::uint64_t seed,
                     std::vector<std::pair<std::string, std::string>> extra_meta)
    : out_(out) {
    char hashbuf[32];
    std::snprintf(hashbuf, sizeof hashbuf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(config_string)));
    out_ << "# tool_version=" << kToolVersion << "\n";
    out_ << "# config_hash=" << hashbuf << "\n";
    out_ << "# seed=" << seed << "\n";
    for (const auto& [k, v] : extra_meta) out_ << "# " << k << "=" << v << "\n";
}

void CsvWriter::header(const std::vector<std::string>& columns) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) out_ << ",";
        out_ << columns[i];
    }
    out_ << "\n";
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ",";
        out_ << cells[i];
    }
    out_ << "\n";
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace kcmlab
