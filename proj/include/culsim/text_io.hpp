#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace culsim {

// Fixed number formatting for all data files: 17 significant digits, enough
// to round-trip any double exactly.
std::string fmt_g17(double value);

double parse_double(const std::string& text);
long long parse_int(const std::string& text);
std::uint64_t parse_u64(const std::string& text);
bool parse_bool(const std::string& text);

std::vector<std::string> split(const std::string& line, char sep);
std::string trim(const std::string& text);

std::string read_file(const std::filesystem::path& path);

// Writes via a temporary file plus rename, so a crash never leaves a
// partially written artifact behind.
void atomic_write(const std::filesystem::path& path, const std::string& content);

// One `key = value` entry per line, `#` starts a comment. Order preserved.
struct KvEntry {
    std::string key;
    std::string value;
};
std::vector<KvEntry> parse_kv_text(const std::string& text);

}  // namespace culsim
