#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace kcmlab {

inline constexpr const char* kToolVersion = "0.1.0";

// FNV-1a 64-bit over the canonical config string; embedded in output headers
// so a result file pins the exact configuration that produced it.
constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// CSV with '#'-prefixed metadata lines, then a header row, then data rows.
// All values are preformatted strings so the byte output is fully
// deterministic under a fixed configuration.
class CsvWriter {
public:
    CsvWriter(std::ostream& out, std::string config_string, std::uint64_t seed,
              std::vector<std::pair<std::string, std::string>> extra_meta = {});

    void header(const std::vector<std::string>& columns);
    void row(const std::vector<std::string>& cells);

private:
    std::ostream& out_;
};

// Shortest decimal representation that round-trips the double.
std::string format_double(double v);

}  // namespace kcmlab
