#pragma once

#include <cstdint>

#include "tabinr/table.hpp"

namespace tabinr {

// Offline stand-ins for the benchmark datasets. All columns fully observed.

// x_ij = a_i * b_j + noise, numeric columns f0..f{m-1}.
EncodedTable synth_rank1(int n, int m, std::uint64_t seed, double noise_std = 0.01);

// Factor-structured correlated Gaussians: x_i = F z_i + eps.
EncodedTable synth_correlated_gaussian(int n, int m, std::uint64_t seed,
                                       int factors = 2, double noise_std = 0.3);

// Correlated Gaussian numerics plus categorical columns derived from
// logistic transforms of the latent factors.
EncodedTable synth_logistic_categorical(int n, int num_numeric, int num_categorical,
                                        int categories, std::uint64_t seed);

}  // namespace tabinr
