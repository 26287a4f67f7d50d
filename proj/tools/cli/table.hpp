#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace stm::cli {

/// Shortest decimal that reads back to the same double; '.' separator,
/// independent of the global locale. Throws EvaluationError on NaN or inf.
std::string format_number(double value);

/// Minimal CSV writer: one header line, comma separated, '\n' line ends.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& file, const std::vector<std::string>& header);

    CsvWriter& text(std::string_view field);
    CsvWriter& number(double value);
    CsvWriter& count(std::size_t value);
    void end_row();

private:
    void separator();

    std::ofstream out_;
    std::filesystem::path file_;
    std::size_t columns_ = 0;
    std::size_t in_row_ = 0;
};

/// Writes `content` to `file`, creating parent directories.
void write_text(const std::filesystem::path& file, std::string_view content);

}  // namespace stm::cli
