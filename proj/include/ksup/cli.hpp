#pragma once

#include "ksup/engine.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace ksup::cli {

enum Exit { kOk = 0, kConfigError = 1, kStageAbort = 2, kInvariantFailed = 3 };

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    int n = 2;
    int m = 7;
    std::vector<double> lambda; // empty means auto
    std::string target = "gauss-bump";
    double tol = 1e-3;
    int k_max = 5;
    int t_max = 1;
    std::uint64_t seed = 1;
    Variant variant = Variant::Standard;
    std::filesystem::path output = "out";
    int grid_res = 201;
    std::uint64_t max_boxes = 20'000'000;
    DeltaRule delta_rule = DeltaRule::Anchor;
    ModulusSource modulus = ModulusSource::Certified;
    int sphere_resolution = 100000;
};

/// key = value per line, '#' starts a comment, arrays comma separated.
/// Unknown keys and malformed values throw ConfigError.
RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::filesystem::path& path);

// Each command writes diagnostics to `err` as "level=... cmd=... msg=..." lines
// and returns an exit code.
int cmd_approximate(const std::filesystem::path& config, std::ostream& out, std::ostream& err);
int cmd_eval(const std::filesystem::path& representation, const std::filesystem::path& points,
             const std::filesystem::path& output, std::ostream& out, std::ostream& err);
int cmd_check(const std::filesystem::path& path, std::ostream& out, std::ostream& err);
int cmd_plot(const std::filesystem::path& path, const std::string& kind,
             const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err);

struct CheckRow {
    std::string name;
    bool ok = true;
    std::string detail;
};

/// The invariant suite behind cmd_check.
std::vector<CheckRow> check_representation(const Representation& rep);

} // namespace ksup::cli
