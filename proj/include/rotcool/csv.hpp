#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace rotcool::csv {

inline constexpr const char* schemaVersion = "1";

// 12 significant digits, locale-independent
inline std::string num(double v) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os.precision(12);
    os << v;
    return os.str();
}

class Writer {
public:
    Writer(const std::filesystem::path& path, const std::string& schema,
           const std::vector<std::pair<std::string, std::string>>& metadata,
           const std::vector<std::string>& columns)
        : out_(path) {
        if (!out_) throw std::runtime_error("cannot open '" + path.string() + "'");
        out_ << "# schema: " << schema << " v" << schemaVersion << "\n";
        for (const auto& [k, v] : metadata) out_ << "# " << k << ": " << v << "\n";
        for (std::size_t i = 0; i < columns.size(); ++i)
            out_ << (i ? "," : "") << columns[i];
        out_ << "\n";
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            out_ << (i ? "," : "") << cells[i];
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

} // namespace rotcool::csv
