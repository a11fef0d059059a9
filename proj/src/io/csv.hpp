#pragma once

#include <string>
#include <vector>

namespace sca {

// Minimal RFC-4180 table builder: comma separators, LF records, '.' decimal
// point, quoting only where required.
class Csv {
  public:
    explicit Csv(std::vector<std::string> columns);
    void add_row(std::vector<std::string> cells);
    const std::vector<std::string>& columns() const { return columns_; }
    size_t row_count() const { return rows_.size(); }
    std::string text() const;

  private:
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

std::string csv_num(double x);      // shortest exact decimal form (%.17g)
std::string csv_int(long long x);

// write-temp-then-rename so readers never observe partial files
void write_text_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace sca
