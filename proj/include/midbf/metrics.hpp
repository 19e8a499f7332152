// Accuracy metrics for recovered phases and butterfly factorizations,
// evaluated on random samples so they stay affordable at large N.
#pragma once

#include <cstdint>

#include "midbf/butterfly.hpp"
#include "midbf/phase_md.hpp"
#include "midbf/types.hpp"

namespace midbf::metrics {

// Entry evaluator K(i,j) = e^{2 pi i U(i,:).V(j,:)} of a recovered phase;
// each call costs O(r) where r is the phase rank.
bf::EntryFn phase_entry_fn(const phase::LowRankPhase& ph);

// Relative l2 error of the factorized product g_b = F f against direct
// summation of the reference kernel over `nrows` sampled rows:
// sqrt(sum_{i in S} |g_b(i) - g_d(i)|^2 / sum_{i in S} |g_d(i)|^2).
// The direct sum touches only the sampled rows, never the full kernel.
double eps_b(const bf::Factorization& F, const bf::EntryFn& K, const VecXc& f,
             Index nrows, std::uint64_t seed);

// Same metric for an arbitrary already-computed product g_b.
double eps_b_of(const VecXc& g_b, const bf::EntryFn& K, const VecXc& f,
                Index nrows, std::uint64_t seed);

// Relative spectral-norm error of e^{2 pi i U V^T} against the reference
// kernel on a random sample of at most `nsamp` rows and columns:
// ||K(S1,S2) - e^{2 pi i U(S1,:) V(S2,:)^T}||_2 / ||K(S1,S2)||_2.
double eps_K(const phase::LowRankPhase& ph, const bf::EntryFn& K,
             Index nsamp, std::uint64_t seed);

}  // namespace midbf::metrics
