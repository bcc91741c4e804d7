#include "fndam/kernels.hpp"

#include <cassert>
#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fndam::kernels {

namespace {
using Index = std::ptrdiff_t;

Index ssize(std::size_t n) { return static_cast<Index>(n); }
}  // namespace

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void advance_serial(std::span<DamCell> cells, double dt) {
    for (auto& c : cells) {
        c = decay(c, dt);
    }
}

void advance_parallel(std::span<DamCell> cells, double dt) {
    const Index n = ssize(cells.size());
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) {
        cells[i] = decay(cells[i], dt);
    }
}

void read_serial(std::span<const DamCell> cells, std::span<WeightReading> out) {
    assert(out.size() == cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        out[i] = read_weight(cells[i]);
    }
}

void read_parallel(std::span<const DamCell> cells, std::span<WeightReading> out) {
    assert(out.size() == cells.size());
    const Index n = ssize(cells.size());
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) {
        out[i] = read_weight(cells[i]);
    }
}

void decay_factors_serial(std::span<const DamCell> cells, std::uint64_t n, double dt,
                          std::span<double> factor) {
    assert(factor.size() == cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        factor[i] = decay_factor(cells[i].set_params, cells[i].set_node.k0, n, dt);
    }
}

void decay_factors_parallel(std::span<const DamCell> cells, std::uint64_t n, double dt,
                            std::span<double> factor) {
    assert(factor.size() == cells.size());
    const Index m = ssize(cells.size());
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < m; ++i) {
        factor[i] = decay_factor(cells[i].set_params, cells[i].set_node.k0, n, dt);
    }
}

void apply_decay_serial(std::span<double> theta, std::span<const double> factor,
                        std::span<const double> drift) {
    assert(factor.size() == theta.size() && drift.size() == theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        theta[i] = (1.0 - factor[i]) * theta[i] + drift[i];
    }
}

void apply_decay_parallel(std::span<double> theta, std::span<const double> factor,
                          std::span<const double> drift) {
    assert(factor.size() == theta.size() && drift.size() == theta.size());
    const Index n = ssize(theta.size());
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) {
        theta[i] = (1.0 - factor[i]) * theta[i] + drift[i];
    }
}

}  // namespace fndam::kernels
