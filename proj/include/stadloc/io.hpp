#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "stadloc/eigensolver.hpp"
#include "stadloc/husimi.hpp"
#include "stadloc/localization.hpp"
#include "stadloc/transport.hpp"

namespace stadloc {

namespace fs = std::filesystem;

inline constexpr std::uint32_t kBndfVersion = 1;
inline constexpr std::uint32_t kHusgVersion = 1;

/// "BNDF", version, count, then per state k, n, s[n], u[n] (little endian).
void write_bndf(const fs::path& path, const std::vector<BoundaryFunction>& states);
std::vector<BoundaryFunction> read_bndf(const fs::path& path);

/// "HUSG", version, nq, np, epsilon, k, values row-major. The momentum range
/// is not stored; grids read back get p in [0, 1].
void write_husg(const fs::path& path, const HusimiGrid& grid);
HusimiGrid read_husg(const fs::path& path);

/// index,k,method,window_id
void write_levels_csv(const fs::path& path, const SpectrumWindow& window);
SpectrumWindow read_levels_csv(const fs::path& path, double epsilon);

/// n,var_p
void write_diffusion_csv(const fs::path& path, const DiffusionCurve& curve);

/// k,A,nIPR,I
void write_localization_csv(const fs::path& path, const std::vector<LocalizationRecord>& records);
std::vector<LocalizationRecord> read_localization_csv(const fs::path& path);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const fs::path& path);
std::string sha256_hex(std::string_view data);

/// Writes to a temporary sibling and renames over the target.
void write_text_atomic(const fs::path& path, const std::string& content);
std::string read_text(const fs::path& path);

/// Simple comma-separated table writer with full double precision.
std::string format_double(double v);

}  // namespace stadloc
