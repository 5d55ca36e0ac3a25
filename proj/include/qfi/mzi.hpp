// mzi.hpp: two-mode truncated Fock space for the Mach-Zehnder demo

#pragma once

#include "qfi/ensemble.hpp"
#include "qfi/hermitian.hpp"
#include "qfi/qfi_engine.hpp"

namespace qfi::mzi {

/// Basis |n_a, n_b> with 0 <= n_a, n_b < cutoff, ordered n_a-major:
/// index = n_a * cutoff + n_b.
struct TwoModeSpace {
    int cutoff;

    Index dim() const noexcept { return Index{cutoff} * cutoff; }
    Index index(int na, int nb) const noexcept { return Index{na} * cutoff + nb; }
};

/// H = (a^dag b - a b^dag) / (2i) on the truncated two-mode space.
HermitianMatrix generator_full(int cutoff);

/// The same generator restricted to total photon number n, basis
/// |k, n - k> for k = 0..n.
HermitianMatrix generator_sector(int photons);

/// |n, 0> in either representation.
Vector fock_input_full(int photons, int cutoff);
Vector fock_input_sector(int photons);

/// Norm of the part of H|psi> that the untruncated ladder operators would
/// push past the cutoff. `psi` is in the full truncated basis.
double escape_amplitude(const Vector& psi, int cutoff);

struct DemoResult {
    int photons = 0;
    int truncation = 0;
    bool full_space = false;
    Index dim = 0;
    double F_pure = 0.0;
    QfiReport report;
    OptimalityVerdict verdict;
    double escape = 0.0;
};

/// Fock input |n, 0>: F via the pure-state formula and via the support
/// pathway (s = 1), plus the eigen-ensemble optimality check. Throws
/// TruncationTooSmall when truncation < n + 1 or the ladder action escapes
/// the cutoff by more than 1e-12.
DemoResult run_demo(int photons, int truncation, bool full_space = false,
                    double threshold = kDefaultThreshold);

}  // namespace qfi::mzi
