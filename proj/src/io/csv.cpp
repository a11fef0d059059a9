#include "io/csv.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "core/errors.hpp"

namespace sca {
namespace {

std::string escape(const std::string& s) {
    bool needs_quote = s.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs_quote) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

}  // namespace

Csv::Csv(std::vector<std::string> columns) : columns_(std::move(columns)) {
    if (columns_.empty()) throw ContractError("csv: need at least one column");
}

void Csv::add_row(std::vector<std::string> cells) {
    if (cells.size() != columns_.size())
        throw ContractError("csv: row has " + std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(columns_.size()));
    rows_.push_back(std::move(cells));
}

std::string Csv::text() const {
    std::string out;
    for (size_t i = 0; i < columns_.size(); ++i) {
        if (i) out += ",";
        out += escape(columns_[i]);
    }
    out += "\n";
    for (const auto& row : rows_) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out += ",";
            out += escape(row[i]);
        }
        out += "\n";
    }
    return out;
}

std::string csv_num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string csv_int(long long x) { return std::to_string(x); }

void write_text_atomic(const std::string& path, const std::string& content) {
    std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), std::streamsize(content.size()));
        out.flush();
        if (!out) throw IoError("short write to '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) throw IoError("cannot rename '" + tmp.string() + "' to '" + path + "': " + ec.message());
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace sca
