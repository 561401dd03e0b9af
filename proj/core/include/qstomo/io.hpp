#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace qstomo::io {

// FNV-1a 64-bit of the canonical (sorted-key, compact) JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& j);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);
bool exists(const std::string& path);
void ensure_dir(const std::string& path);

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

// Little-endian float64 arrays.
void write_f64(const std::string& path, const std::vector<double>& values);
std::vector<double> read_f64(const std::string& path);

// %.17g formatting, round-trips doubles exactly.
std::string fmt_double(double x);

}  // namespace qstomo::io
