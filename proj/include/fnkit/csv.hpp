#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fnkit::csv {

// RFC 4180: quoted fields may hold commas, quotes ("") and newlines.
// A trailing newline does not produce an empty record; CRLF is accepted.
std::vector<std::vector<std::string>> parse(std::string_view text);
std::vector<std::vector<std::string>> read_file(const std::string& path);

std::string escape(std::string_view field);
std::string join_row(const std::vector<std::string>& fields);

// Column index of `name` in a header row, or throws SchemaError naming it.
std::size_t column(const std::vector<std::string>& header, std::string_view name);

}  // namespace fnkit::csv
