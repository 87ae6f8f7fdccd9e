#ifndef TANGLAB_CSV_HPP
#define TANGLAB_CSV_HPP

#include <charconv>
#include <fstream>
#include <string>
#include <vector>

namespace tanglab {

// shortest round-trip decimal formatting, reproducible across platforms
inline std::string fmt_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : out_(path) {
        if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path);
    }
    void header(const std::vector<std::string>& cols) { row_strings(cols); }
    void row_strings(const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

} // namespace tanglab

#endif
