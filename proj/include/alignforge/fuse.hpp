#pragma once

#include <string>
#include <vector>

#include "alignforge/safetensors.hpp"

namespace alignforge {

struct FusionInput {
    std::string path;
    double coefficient = 0.0;
};

struct FusionSpec {
    std::vector<FusionInput> inputs; // at least one
    bool normalize = false;          // rescale coefficients to sum to 1

    // normalize=false requires |sum(c) - 1| <= 1e-6.
    std::vector<double> resolved_coefficients() const;
};

// Weighted average of checkpoints sharing an identical tensor set: for every
// float tensor, out = sum(c_i * in_i) accumulated in double (tensors in
// sorted-name order, inputs in spec order), cast back to the input dtype
// with round-to-nearest-even. Integer tensors must be identical across
// inputs and are copied. Mismatches raise errors naming the tensor.
Checkpoint fuse_checkpoints(const std::vector<const Checkpoint*>& inputs,
                            const std::vector<double>& coefficients);

// Loads the spec's files and fuses them; metadata records the spec.
Checkpoint fuse(const FusionSpec& spec);

struct SweepEntry {
    std::vector<double> coefficients;
    std::string output_path;
};

// Enumerates every coefficient grid point (multiples of `step` summing to 1
// across the inputs), writes one fused checkpoint per point plus a JSON
// report, and returns the entries.
std::vector<SweepEntry> fuse_sweep(const std::vector<std::string>& paths, double step,
                                   const std::string& out_dir);

} // namespace alignforge
