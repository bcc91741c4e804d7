#pragma once

// Element-wise kernels over cell and parameter arrays. Each kernel has a
// serial reference and an OpenMP version; both produce bit-identical results
// because every element is computed independently.

#include <cstdint>
#include <span>

#include "fndam/dam_cell.hpp"

namespace fndam::kernels {

enum class Exec { serial, parallel };

int max_threads();

void advance_serial(std::span<DamCell> cells, double dt);
void advance_parallel(std::span<DamCell> cells, double dt);

void read_serial(std::span<const DamCell> cells, std::span<WeightReading> out);
void read_parallel(std::span<const DamCell> cells, std::span<WeightReading> out);

/// factor[i] = decay_factor of cell i's SET node at step n.
void decay_factors_serial(std::span<const DamCell> cells, std::uint64_t n, double dt,
                          std::span<double> factor);
void decay_factors_parallel(std::span<const DamCell> cells, std::uint64_t n, double dt,
                            std::span<double> factor);

/// theta[i] = (1 - factor[i]) * theta[i] + drift[i]
void apply_decay_serial(std::span<double> theta, std::span<const double> factor,
                        std::span<const double> drift);
void apply_decay_parallel(std::span<double> theta, std::span<const double> factor,
                          std::span<const double> drift);

inline void advance(std::span<DamCell> cells, double dt, Exec exec) {
    exec == Exec::parallel ? advance_parallel(cells, dt) : advance_serial(cells, dt);
}

inline void read(std::span<const DamCell> cells, std::span<WeightReading> out, Exec exec) {
    exec == Exec::parallel ? read_parallel(cells, out) : read_serial(cells, out);
}

}  // namespace fndam::kernels
