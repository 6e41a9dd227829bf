#include "csv.hpp"

#include "ere/error.hpp"

#include <fstream>

namespace ere::cli {

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false, field_started = false, quoted_field = false;
  std::size_t line = 1, record_line = 1;
  bool any = false;

  auto end_field = [&] {
    record.push_back(field);
    field.clear();
    field_started = quoted_field = false;
  };
  auto end_record = [&] {
    end_field();
    if (t.header.empty() && t.rows.empty() && !any) {
      t.header = std::move(record);
    } else {
      if (record.size() == 1 && record[0].empty()) {
        // blank line
      } else {
        if (record.size() != t.header.size()) {
          throw DataError("line " + std::to_string(record_line) + ": expected " + std::to_string(t.header.size()) +
                          " fields, found " + std::to_string(record.size()));
        }
        t.rows.push_back(std::move(record));
        t.line_of_row.push_back(record_line);
      }
    }
    any = true;
    record.clear();
    record_line = line;
  };

  // UTF-8 byte order mark
  if (in.peek() == 0xEF) {
    char bom[3];
    in.read(bom, 3);
    if (!(in.gcount() == 3 && bom[1] == '\xBB' && bom[2] == '\xBF')) {
      throw DataError("line 1: input starts with an invalid byte sequence");
    }
  }
  char c;
  bool pending = false;  // characters seen since the last record end
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started) {
          throw DataError("line " + std::to_string(line) + ", field " + std::to_string(record.size() + 1) +
                          ": stray quote inside an unquoted field");
        }
        in_quotes = quoted_field = field_started = true;
        pending = true;
        break;
      case ',':
        end_field();
        pending = true;
        break;
      case '\r':
        if (in.peek() == '\n') break;
        [[fallthrough]];
      case '\n':
        ++line;
        end_record();
        pending = false;
        break;
      default:
        if (quoted_field) {
          throw DataError("line " + std::to_string(line) + ", field " + std::to_string(record.size() + 1) +
                          ": characters after a closing quote");
        }
        field += c;
        field_started = pending = true;
    }
  }
  if (in_quotes) throw DataError("unterminated quoted field starting on line " + std::to_string(record_line));
  if (pending) end_record();
  if (t.header.empty()) throw DataError("CSV input has no header row");
  return t;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open data file '" + path + "'");
  return read_csv(in);
}

}  // namespace ere::cli
