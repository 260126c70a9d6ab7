#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace casym {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Index of a header column; throws ValidationError if missing.
    [[nodiscard]] std::size_t column(const std::string& name) const;
};

// Reads a header row plus data rows. Quoted fields may contain commas.
[[nodiscard]] CsvTable read_csv(const std::filesystem::path& path);

// Shortest decimal text that round-trips to the same double.
[[nodiscard]] std::string format_double(double v);

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
    void row(const std::vector<std::string>& fields);

private:
    std::ofstream out_;
    std::size_t width_;
};

} // namespace casym
