#include "table.hpp"

#include <charconv>
#include <cmath>

#include "stm/errors.hpp"

namespace stm::cli {

std::string format_number(double value) {
    if (!std::isfinite(value)) throw EvaluationError("refusing to write a non-finite number");
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_for_writing(const std::filesystem::path& file) {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw EvaluationError("cannot write " + file.string());
    return out;
}

}  // namespace

CsvWriter::CsvWriter(const std::filesystem::path& file,
                     const std::vector<std::string>& header)
    : out_(open_for_writing(file)), file_(file), columns_(header.size()) {
    for (const auto& h : header) text(h);
    end_row();
}

void CsvWriter::separator() {
    if (in_row_++ > 0) out_ << ',';
}

CsvWriter& CsvWriter::text(std::string_view field) {
    separator();
    out_ << field;
    return *this;
}

CsvWriter& CsvWriter::number(double value) {
    separator();
    out_ << format_number(value);
    return *this;
}

CsvWriter& CsvWriter::count(std::size_t value) {
    separator();
    out_ << value;
    return *this;
}

void CsvWriter::end_row() {
    if (columns_ != 0 && in_row_ != columns_)
        throw EvaluationError(file_.string() + ": row has " + std::to_string(in_row_) +
                              " fields, header has " + std::to_string(columns_));
    out_ << '\n';
    in_row_ = 0;
    if (!out_) throw EvaluationError("write failed: " + file_.string());
}

void write_text(const std::filesystem::path& file, std::string_view content) {
    auto out = open_for_writing(file);
    out << content;
    if (!out) throw EvaluationError("write failed: " + file.string());
}

}  // namespace stm::cli
