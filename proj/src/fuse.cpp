#include "alignforge/fuse.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>

#include "alignforge/errors.hpp"
#include "alignforge/jsonl.hpp"

namespace fs = std::filesystem;

namespace alignforge {

std::vector<double> FusionSpec::resolved_coefficients() const {
    if (inputs.empty()) throw ConfigError("fusion spec needs at least one input");
    double sum = 0.0;
    std::vector<double> coeffs;
    coeffs.reserve(inputs.size());
    for (const auto& in : inputs) {
        coeffs.push_back(in.coefficient);
        sum += in.coefficient;
    }
    if (normalize) {
        if (std::abs(sum) < 1e-12)
            throw ConfigError("cannot normalize coefficients that sum to zero");
        for (double& c : coeffs) c /= sum;
    } else if (std::abs(sum - 1.0) > 1e-6) {
        throw ConfigError("coefficients sum to " + std::to_string(sum) +
                          "; pass --normalize or make them sum to 1");
    }
    return coeffs;
}

Checkpoint fuse_checkpoints(const std::vector<const Checkpoint*>& inputs,
                            const std::vector<double>& coefficients) {
    if (inputs.empty() || inputs.size() != coefficients.size())
        throw ConfigError("fuse needs matching checkpoints and coefficients");

    const Checkpoint& first = *inputs[0];
    for (size_t i = 1; i < inputs.size(); i++) {
        const Checkpoint& other = *inputs[i];
        for (const auto& [name, _] : first.tensors)
            if (!other.tensors.count(name))
                throw Error("tensor name-set mismatch: '" + name + "' missing from input " +
                            std::to_string(i));
        for (const auto& [name, _] : other.tensors)
            if (!first.tensors.count(name))
                throw Error("tensor name-set mismatch: '" + name + "' missing from input 0");
        for (const auto& [name, info] : first.tensors) {
            const auto& oinfo = other.tensors.at(name);
            if (oinfo.dtype != info.dtype)
                throw Error("dtype mismatch on tensor '" + name + "'");
            if (oinfo.shape != info.shape)
                throw Error("shape mismatch on tensor '" + name + "'");
        }
    }

    Checkpoint out;
    out.data.resize(first.data.size());
    out.tensors = first.tensors; // same layout is re-derived on save

    for (const auto& [name, info] : first.tensors) {
        auto dst = out.tensor_bytes(name);
        if (dtype_is_float(info.dtype)) {
            const size_t n = info.numel();
            std::vector<std::span<const uint8_t>> srcs;
            srcs.reserve(inputs.size());
            for (const auto* ckpt : inputs) srcs.push_back(ckpt->tensor_bytes(name));
            for (size_t e = 0; e < n; e++) {
                double acc = 0.0;
                for (size_t i = 0; i < srcs.size(); i++)
                    acc += coefficients[i] * read_element(srcs[i], info.dtype, e);
                write_element(dst, info.dtype, e, acc);
            }
        } else {
            auto base = first.tensor_bytes(name);
            for (size_t i = 1; i < inputs.size(); i++) {
                auto other = inputs[i]->tensor_bytes(name);
                if (other.size() != base.size() ||
                    std::memcmp(other.data(), base.data(), base.size()) != 0)
                    throw Error("integer tensor '" + name +
                                "' differs across inputs; averaging it is meaningless");
            }
            std::memcpy(dst.data(), base.data(), base.size());
        }
    }
    return out;
}

Checkpoint fuse(const FusionSpec& spec) {
    auto coeffs = spec.resolved_coefficients();

    std::vector<Checkpoint> loaded;
    loaded.reserve(spec.inputs.size());
    for (const auto& in : spec.inputs) loaded.push_back(load_checkpoint(in.path));
    std::vector<const Checkpoint*> ptrs;
    for (const auto& c : loaded) ptrs.push_back(&c);

    Checkpoint out = fuse_checkpoints(ptrs, coeffs);

    json spec_j = json::array();
    for (size_t i = 0; i < spec.inputs.size(); i++)
        spec_j.push_back({{"path", spec.inputs[i].path}, {"coefficient", coeffs[i]}});
    out.metadata["fused_from"] = spec_j.dump();
    return out;
}

namespace {

void enumerate_grid(size_t n_inputs, int units, std::vector<int>& current,
                    std::vector<std::vector<int>>& out) {
    if (current.size() == n_inputs - 1) {
        int used = 0;
        for (int u : current) used += u;
        current.push_back(units - used);
        out.push_back(current);
        current.pop_back();
        return;
    }
    int used = 0;
    for (int u : current) used += u;
    for (int u = 0; u <= units - used; u++) {
        current.push_back(u);
        enumerate_grid(n_inputs, units, current, out);
        current.pop_back();
    }
}

} // namespace

std::vector<SweepEntry> fuse_sweep(const std::vector<std::string>& paths, double step,
                                   const std::string& out_dir) {
    if (paths.empty()) throw ConfigError("sweep needs at least one input checkpoint");
    if (step <= 0.0 || step > 1.0) throw ConfigError("sweep step must be in (0, 1]");
    double units_f = 1.0 / step;
    int units = int(std::lround(units_f));
    if (std::abs(units_f - double(units)) > 1e-9)
        throw ConfigError("sweep step must divide 1 evenly");

    std::vector<Checkpoint> loaded;
    loaded.reserve(paths.size());
    for (const auto& p : paths) loaded.push_back(load_checkpoint(p));
    std::vector<const Checkpoint*> ptrs;
    for (const auto& c : loaded) ptrs.push_back(&c);

    std::vector<std::vector<int>> grid;
    std::vector<int> scratch;
    enumerate_grid(paths.size(), units, scratch, grid);

    fs::create_directories(out_dir);
    std::vector<SweepEntry> entries;
    json report = json::array();
    for (size_t g = 0; g < grid.size(); g++) {
        std::vector<double> coeffs;
        coeffs.reserve(paths.size());
        for (int u : grid[g]) coeffs.push_back(double(u) * step);

        Checkpoint fused = fuse_checkpoints(ptrs, coeffs);
        json spec_j = json::array();
        for (size_t i = 0; i < paths.size(); i++)
            spec_j.push_back({{"path", paths[i]}, {"coefficient", coeffs[i]}});
        fused.metadata["fused_from"] = spec_j.dump();

        std::string out_path = out_dir + "/fused_" + std::to_string(g) + ".safetensors";
        save_checkpoint(fused, out_path);
        entries.push_back({coeffs, out_path});
        report.push_back({{"coefficients", coeffs}, {"output", out_path}});
    }
    write_json_file(out_dir + "/sweep_report.json", report);
    return entries;
}

} // namespace alignforge
