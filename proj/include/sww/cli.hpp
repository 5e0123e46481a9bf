// Run configuration, the three command drivers and the output manifest.
//
// Output schemas (first key or header line carries the version):
//   spectrum.json    sww.spectrum/1   nonzero coefficients [l, j, re, im] of eta and psi
//   eta_grid.csv     # sww.eta_grid/1 t,x,eta on a uniform grid of [0, 2pi)^2
//   run_record.json  sww.run/1        Nash-Moser steps and outcome (no timings)
//   verify.csv       # sww.verify/1   check,measured,bound,pass
//   measure.csv      # sww.measure/1  one row per eps
//   measure.json     sww.measure/1    fitted constants of the sweep
//   manifest.json    sww.manifest/1   config hash and a CRC-32 per emitted file
#pragma once

#include "sww/solver.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace sww {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct RunConfig {
    double kappa = 0.41421356237309515;  // sqrt(2) - 1
    std::vector<double> eps{5e-3};
    // The first admissible value is used by solve.
    std::vector<double> xi{1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9, 2.0};
    // Coefficient table and largest Galerkin box.
    int L_max = 24;
    int J_max = 24;
    int sigma = 6;
    double tol = 1e-11;
    InversionMode mode = InversionMode::Direct;
    // Points per direction of the sampled surface.
    int grid = 64;
    int samples = 10000;
    int measure_J_max = 10000;
    std::string out = "out";
    int threads = 1;
    unsigned long long seed = 1;

    // Throws ConfigError on a violated invariant.
    void validate() const;
    // Fields that affect results; out and threads are left out.
    std::string canonical_json() const;
};

// Missing keys keep their defaults; unknown keys are rejected.
RunConfig load_config(const std::filesystem::path& path);
RunConfig config_from_json(const std::string& text);

struct ManifestEntry {
    std::string name;
    std::uintmax_t bytes = 0;
    std::string crc32;
};

std::string crc32_hex(const std::string& data);

// Collects the files of one command and writes manifest.json last.
class OutputDir {
public:
    OutputDir(std::filesystem::path dir, std::string mode, const RunConfig& cfg);
    void write(const std::string& name, const std::string& content);
    // Returns the manifest text.
    std::string finish();
    const std::filesystem::path& path() const { return dir_; }

private:
    std::filesystem::path dir_;
    std::string mode_;
    std::string config_hash_;
    std::vector<ManifestEntry> entries_;
};

std::string spectrum_json(const NashMoserResult& r);
std::string eta_grid_csv(const Field2D& eta, int n);
std::string run_record_json(const RunRecord& r);

// Exit codes: 0 success, 1 probe or certification failure, 3 no admissible xi / excluded.
int cmd_solve(const RunConfig& cfg);
// Throws ConfigError for an unknown suite.
int cmd_verify(const RunConfig& cfg, const std::string& suite);
int cmd_measure(const RunConfig& cfg);

}  // namespace sww
