#include "qmpemba/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace qmpemba::io {

namespace {

int significantDigits(const std::string& s) {
    std::size_t end = s.find_first_of("eE");
    if (end == std::string::npos) {
        end = s.size();
    }
    int count = 0;
    bool seenNonzero = false;
    for (std::size_t i = 0; i < end; ++i) {
        const char c = s[i];
        if (c < '0' || c > '9') {
            continue;
        }
        if (c != '0') {
            seenNonzero = true;
        }
        if (seenNonzero) {
            ++count;
        }
    }
    return count;
}

std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) {
        ++a;
    }
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) {
        --b;
    }
    return s.substr(a, b - a);
}

}  // namespace

std::string formatDouble(double value, int precision) {
    if (precision < kMinPrecision || precision > kMaxPrecision) {
        throw ConfigError("precision must lie in [6, 17], got " +
                          std::to_string(precision));
    }
    if (value == 0.0) {
        return "0";  // folds away the sign of negative zero
    }
    char buffer[64];
    auto shortest = std::to_chars(buffer, buffer + sizeof(buffer), value);
    std::string s(buffer, shortest.ptr);
    if (significantDigits(s) <= precision) {
        return s;
    }
    auto truncated = std::to_chars(buffer, buffer + sizeof(buffer), value,
                                   std::chars_format::general, precision);
    return std::string(buffer, truncated.ptr);
}

std::string writeCsv(const Table& table) {
    const auto checkCell = [](const std::string& cell) {
        if (cell.find_first_of(",\"\n\r") != std::string::npos) {
            throw ConfigError("CSV cell '" + cell +
                              "' contains a separator or line break");
        }
    };
    std::string out;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        checkCell(table.header[i]);
        if (i) {
            out += ',';
        }
        out += table.header[i];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size()) {
            throw ConfigError("CSV row has " + std::to_string(row.size()) +
                              " cells, header has " +
                              std::to_string(table.header.size()));
        }
        for (std::size_t i = 0; i < row.size(); ++i) {
            checkCell(row[i]);
            if (i) {
                out += ',';
            }
            out += row[i];
        }
        out += '\n';
    }
    return out;
}

Table readCsv(const std::string& text) {
    Table table;
    std::size_t pos = 0;
    bool haveHeader = false;
    std::size_t lineNo = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) {
            throw ConfigError("CSV line " + std::to_string(lineNo + 1) +
                              " is not terminated by a line feed");
        }
        const std::string line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++lineNo;
        std::vector<std::string> cells;
        std::size_t cellStart = 0;
        while (true) {
            const std::size_t comma = line.find(',', cellStart);
            if (comma == std::string::npos) {
                cells.push_back(line.substr(cellStart));
                break;
            }
            cells.push_back(line.substr(cellStart, comma - cellStart));
            cellStart = comma + 1;
        }
        if (!haveHeader) {
            table.header = cells;
            haveHeader = true;
        } else {
            if (cells.size() != table.header.size()) {
                throw ConfigError("CSV line " + std::to_string(lineNo) +
                                  " has " + std::to_string(cells.size()) +
                                  " cells, header has " +
                                  std::to_string(table.header.size()));
            }
            table.rows.push_back(std::move(cells));
        }
    }
    if (!haveHeader) {
        throw ConfigError("CSV input is empty (no header row)");
    }
    return table;
}

Config Config::parse(const std::string& text) {
    Config config;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#' || stripped[0] == ';') {
            continue;
        }
        if (stripped.front() == '[') {
            if (stripped.back() != ']') {
                throw ConfigError("line " + std::to_string(lineNo) +
                                  ": unterminated section header");
            }
            section = trim(stripped.substr(1, stripped.size() - 2));
            if (section.empty()) {
                throw ConfigError("line " + std::to_string(lineNo) +
                                  ": empty section name");
            }
            continue;
        }
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineNo) +
                              ": expected 'key = value' or '[section]', "
                              "got '" +
                              stripped + "'");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("line " + std::to_string(lineNo) +
                              ": empty key");
        }
        const std::string full = section.empty() ? key : section + "." + key;
        if (config.index_.count(full)) {
            throw ConfigError("line " + std::to_string(lineNo) +
                              ": duplicate key '" + full + "'");
        }
        config.index_[full] = config.entries_.size();
        config.entries_.emplace_back(full, value);
    }
    return config;
}

Config Config::parseFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

bool Config::has(const std::string& key) const {
    return index_.count(key) != 0;
}

std::string Config::getString(const std::string& key) const {
    const auto it = index_.find(key);
    if (it == index_.end()) {
        throw ConfigError("missing required field '" + key + "'");
    }
    return entries_[it->second].second;
}

std::string Config::getString(const std::string& key,
                              const std::string& fallback) const {
    return has(key) ? getString(key) : fallback;
}

double Config::parseDouble(const std::string& key,
                           const std::string& raw) const {
    const std::string value = trim(raw);
    if (value.empty()) {
        throw ConfigError("field '" + key + "' is empty");
    }
    char* end = nullptr;
    const double parsed = std::strtod(value.c_str(), &end);
    if (end != value.c_str() + value.size()) {
        throw ConfigError("field '" + key + "': expected a real number, "
                          "got '" +
                          value + "'");
    }
    if (!std::isfinite(parsed)) {
        throw ConfigError("field '" + key + "' must be finite");
    }
    return parsed;
}

double Config::getDouble(const std::string& key) const {
    return parseDouble(key, getString(key));
}

double Config::getDouble(const std::string& key, double fallback) const {
    return has(key) ? getDouble(key) : fallback;
}

int Config::getInt(const std::string& key) const {
    const double value = getDouble(key);
    const double rounded = std::nearbyint(value);
    if (std::abs(value - rounded) > 0.0 || std::abs(rounded) > 1e9) {
        throw ConfigError("field '" + key + "': expected an integer, got '" +
                          getString(key) + "'");
    }
    return static_cast<int>(rounded);
}

int Config::getInt(const std::string& key, int fallback) const {
    return has(key) ? getInt(key) : fallback;
}

std::vector<double> Config::getDoubleList(const std::string& key) const {
    const std::string raw = getString(key);
    std::vector<double> values;
    std::size_t start = 0;
    while (start <= raw.size()) {
        const std::size_t comma = raw.find(',', start);
        const std::string item =
            comma == std::string::npos ? raw.substr(start)
                                       : raw.substr(start, comma - start);
        values.push_back(parseDouble(key, item));
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return values;
}

void Config::set(const std::string& key, const std::string& value) {
    const auto it = index_.find(key);
    if (it != index_.end()) {
        entries_[it->second].second = value;
        return;
    }
    index_[key] = entries_.size();
    entries_.emplace_back(key, value);
}

}  // namespace qmpemba::io
