#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace nwp {

// Shortest decimal representation that round-trips the exact double.
// Every number written to CSV/JSON artifacts goes through this so that
// identical runs produce byte-identical files.
std::string fmt_double(double v);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

std::uint64_t hash_file(const std::filesystem::path& path);

// Minimal RFC-4180 CSV: quoted fields, embedded commas/quotes/newlines.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);
std::string csv_escape(const std::string& field);

}  // namespace nwp
