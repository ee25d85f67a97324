#pragma once

#include <string>

namespace cat {

/// Reads a whole file into a string. Throws IoError when the file cannot be
/// opened.
std::string read_file(const std::string& path);

/// Writes content to path atomically: the bytes go to a sibling temp file
/// which is renamed over the target, so a failed run never leaves a partial
/// artifact behind.
void atomic_write(const std::string& path, const std::string& content);

/// Shortest decimal form of a 32-bit float that parses back bit-exactly.
std::string format_float(float v);

/// Shortest decimal form of a 64-bit double that parses back bit-exactly.
std::string format_float(double v);

/// Fixed-point rendering with the given number of decimals (used by report
/// tables; percentage-point columns use one decimal).
std::string format_fixed(double v, int decimals);

} // namespace cat
