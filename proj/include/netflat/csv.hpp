#pragma once

#include <string>
#include <vector>

namespace netflat {

// Full-precision decimal so oracle comparisons reproduce bit-for-bit.
std::string format_double(double x);

class CsvWriter {
public:
    void header(const std::vector<std::string>& columns);
    void row(const std::vector<std::string>& cells);
    void blank_line();
    const std::string& str() const noexcept { return body_; }

private:
    std::string body_;
};

// Temp-file plus rename; failed runs leave no truncated output.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace netflat
