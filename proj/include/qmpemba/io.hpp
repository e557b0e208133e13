#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qmpemba/errors.hpp"

namespace qmpemba::io {

// Allowed range for output precision (significant digits).
inline constexpr int kMinPrecision = 6;
inline constexpr int kMaxPrecision = 17;
inline constexpr int kDefaultPrecision = 12;

// Formats a double as its shortest round-trip decimal representation,
// truncated to at most `precision` significant digits. Deterministic and
// locale-independent; negative zero is normalized to "0".
std::string formatDouble(double value, int precision);

// A rectangular table of preformatted cells.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// Serializes a table as CSV: comma separators, LF line endings, header
// first. Cells must not contain commas, quotes, or line breaks (they never
// do for numeric output); a violating cell throws ConfigError.
std::string writeCsv(const Table& table);

// Parses CSV produced by writeCsv. Re-serializing the result reproduces the
// input byte-for-byte. Throws ConfigError on ragged rows or missing header.
Table readCsv(const std::string& text);

// A parsed configuration file: '[section]' headers with 'key = value'
// lines, '#' or ';' full-line comments, keys addressed as "section.key".
// Parsing and lookups throw ConfigError with the offending line or field.
class Config {
  public:
    static Config parse(const std::string& text);
    static Config parseFile(const std::string& path);

    bool has(const std::string& key) const;

    std::string getString(const std::string& key) const;
    std::string getString(const std::string& key,
                          const std::string& fallback) const;
    double getDouble(const std::string& key) const;
    double getDouble(const std::string& key, double fallback) const;
    int getInt(const std::string& key) const;
    int getInt(const std::string& key, int fallback) const;
    std::vector<double> getDoubleList(const std::string& key) const;

    // Inserts or overwrites a value (used for command-line overrides).
    void set(const std::string& key, const std::string& value);

    // All entries in file order (overrides keep the original position).
    const std::vector<std::pair<std::string, std::string>>& entries() const {
        return entries_;
    }

  private:
    double parseDouble(const std::string& key,
                       const std::string& raw) const;

    std::vector<std::pair<std::string, std::string>> entries_;
    std::map<std::string, std::size_t> index_;
};

}  // namespace qmpemba::io
