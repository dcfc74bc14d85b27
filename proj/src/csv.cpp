#include "suptask/csv.hpp"

#include "suptask/errors.hpp"

namespace suptask {

namespace {

bool needs_quoting(const std::string& field) {
    return field.find_first_of(",\"\n\r") != std::string::npos;
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
    CsvTable table;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool row_started = false;
    std::size_t line = 1;

    auto end_field = [&]() {
        row.push_back(field);
        field.clear();
    };
    auto end_row = [&]() {
        end_field();
        if (table.header.empty()) {
            table.header = row;
        } else {
            if (row.size() != table.header.size()) {
                throw CsvError("row has " + std::to_string(row.size()) +
                                   " fields, header has " +
                                   std::to_string(table.header.size()),
                               line);
            }
            table.rows.push_back(row);
        }
        row.clear();
        row_started = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
                if (c == '\n') ++line;
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!field.empty()) {
                    throw CsvError("quote inside unquoted field", line);
                }
                in_quotes = true;
                row_started = true;
                break;
            case ',':
                end_field();
                row_started = true;
                break;
            case '\r':
                break;  // tolerate CRLF
            case '\n':
                if (row_started || !field.empty() || !row.empty()) end_row();
                ++line;
                break;
            default:
                field += c;
                row_started = true;
                break;
        }
    }
    if (in_quotes) {
        throw CsvError("unterminated quoted field", line);
    }
    if (row_started || !field.empty() || !row.empty()) end_row();
    if (table.header.empty()) {
        throw CsvError("missing header row", 1);
    }
    return table;
}

std::string emit_csv(const CsvTable& table) {
    std::string out;
    auto emit_row = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            if (needs_quoting(row[i])) {
                out += '"';
                for (char c : row[i]) {
                    if (c == '"') out += '"';
                    out += c;
                }
                out += '"';
            } else {
                out += row[i];
            }
        }
        out += '\n';
    };
    emit_row(table.header);
    for (const auto& row : table.rows) emit_row(row);
    return out;
}

}  // namespace suptask
