#pragma once

#include <cstdint>
#include <functional>

#include "tabinr/table.hpp"

namespace tabinr {

enum class Mechanism { mcar, mar, mnar };

struct MissingnessSpec {
  Mechanism mechanism = Mechanism::mcar;
  double p_miss = 0.0;
  double observed_subset_fraction = 0.3;  // MAR/MNAR: fraction of always-observed columns
  std::uint64_t seed = 0;
  // MNAR second-stage Bernoulli hits subset columns only by default.
  bool second_stage_all_cells = false;
};

Mechanism mechanism_from_string(const std::string& s);
std::string mechanism_to_string(Mechanism m);

// Each observed original-column cell masked independently with probability
// p_miss; categorical groups masked as a unit. Deterministic per seed.
MaskPair mask_mcar(const EncodedTable& table, double p_miss, std::uint64_t seed);

// A seeded subset of columns stays always observed; the rest are masked by a
// logistic model of the standardized always-observed values. The intercept is
// calibrated so the realized rate over ALL cells equals p_miss (throws when
// the subset leaves too few maskable cells for that).
MaskPair mask_mar(const EncodedTable& table, const MissingnessSpec& spec);

// Logistic stage at rate p_miss on non-subset columns, then independent
// Bernoulli(p_miss) on the previously always-observed columns; every column
// and the overall rate land on p_miss.
MaskPair mask_mnar(const EncodedTable& table, const MissingnessSpec& spec);

MaskPair synthesize_mask(const EncodedTable& table, const MissingnessSpec& spec);

// Bisection for b with |probability_fn(b) - target| <= 1e-6 over [-50, 50],
// widened once to [-200, 200] if the bracket misses.
double calibrate_intercept(const std::function<double(double)>& probability_fn,
                           double target_rate);

// Fraction of observed cells covered by the mask.
double realized_rate(const EncodedTable& table, const BoolMask& mask);

}  // namespace tabinr
