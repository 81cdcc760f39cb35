#ifndef SOFTMC_GEOMETRY_HPP
#define SOFTMC_GEOMETRY_HPP

#include <cstdint>

#include "softmc/errors.hpp"

namespace softmc {

/// Shape of the simulated module.
///
/// The bounds mirror the instruction word: 4 bank bits, 24 row bits,
/// 16 column bits. A column transfers bytes_per_column bytes per RD/WR.
struct DeviceGeometry {
    std::uint32_t num_banks = 8;
    std::uint32_t num_rows = 4096;
    std::uint32_t num_columns = 128;
    std::uint32_t bytes_per_column = 8;

    std::uint64_t rows_total() const {
        return std::uint64_t(num_banks) * num_rows;
    }
    std::uint64_t columns_total() const {
        return rows_total() * num_columns;
    }
    std::uint64_t bytes_total() const {
        return columns_total() * bytes_per_column;
    }
    std::uint64_t cells_total() const { return bytes_total() * 8; }

    std::uint32_t cells_per_column() const { return bytes_per_column * 8; }
    std::uint64_t cells_per_row() const {
        return std::uint64_t(num_columns) * cells_per_column();
    }
};

inline constexpr std::uint32_t kMaxBanks = 16;       // 4-bit bank field
inline constexpr std::uint32_t kMaxRows = 1u << 24;  // 24-bit row field
inline constexpr std::uint32_t kMaxColumns = 1u << 16;

/// Throws GeometryError unless every dimension is at least 1 and fits
/// its instruction-word field.
void validate_geometry(const DeviceGeometry& g);

/// The desk-scale default: 8 banks x 4096 rows x 128 columns x 8 bytes
/// (32 MiB of cells), sized so full campaigns finish in seconds.
inline DeviceGeometry default_geometry() { return DeviceGeometry{}; }

} // namespace softmc

#endif
