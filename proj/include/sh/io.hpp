#pragma once
// Small I/O helpers shared by the CLI and the suites: fixed-precision real
// formatting (17 significant digits, locale-independent), text-file helpers,
// and CSV assembly.

#include <cstdint>
#include <string>
#include <vector>

namespace sh::io {

// Formats a double with 17 significant digits ("%.17g"): enough to round-trip
// any IEEE-754 double, and byte-stable for reproducibility checks.
std::string format17(double x);

// Appends one CSV row of already-formatted cells.
std::string csv_row(const std::vector<std::string>& cells);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);
void ensure_dir(const std::string& path);

}  // namespace sh::io
