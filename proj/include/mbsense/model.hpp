#pragma once

#include <cstdint>
#include <vector>

#include "mbsense/types.hpp"

namespace mbsense {

// Symmetric grid fc + n fs, n = -(N-1)/2 .. (N-1)/2. m is zero based.
std::vector<double> frequency_grid(const MultibandConfig& config, int m);

// Half-integer offsets for even N.
std::vector<double> subcarrier_offsets(int N);

// Noise-free CFR, subbands concatenated in order.
std::vector<cplx> synthesize_cfr(const MultibandConfig& config, const PathSet& paths);

std::vector<cplx> synthesize_received(const MultibandConfig& config, const PathSet& paths,
                                      const DistortionModel& dist, const NoiseModel& noise,
                                      std::uint64_t seed);

CanonicalParams canonicalize(const MultibandConfig& config, const PathSet& paths,
                             const DistortionModel& dist);

// Mean signal of the canonical model, same ordering as synthesize_cfr.
std::vector<cplx> canonical_mean(const MultibandConfig& config, const CanonicalParams& cp);

bool check_identifiability(const MultibandConfig& config, int K);

}  // namespace mbsense
