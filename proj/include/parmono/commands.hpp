#pragma once

// Subcommand drivers behind the parmono executable. Each returns the process
// exit code: 0 success, 2 partial failure (flagged grid cells), 1 hard error.
// Hard errors are reported on `err` as {"error": CODE, "detail": text}.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace parmono::cli {

inline constexpr const char* kToolVersion = "0.1.0";

struct CommonArgs {
    std::optional<std::string> out;  // stdout when absent
    double rtol = 1e-10;
    double atol = 1e-12;
    std::uint64_t seed = 0xA11CE;
    int jobs = 0;  // 0: runtime default
};

struct MonodromyArgs {
    std::string system;
    std::string grid;              // file path or inline JSON object
    std::string base = "0";        // constant expression
    std::string loops = "all";     // "all" or comma list of pole indices and "inf"
    std::optional<double> radius;
    CommonArgs common;
};

struct ClassifyArgs {
    MonodromyArgs run;
    double tol_iso = 1e-7;
    double tol_proj = 1e-6;
    int max_refinements = 4;
};

struct IntegrableArgs {
    std::string system;
    std::size_t samples = 50;
    double zc_tol = 1e-9;
    CommonArgs common;
};

struct HalphenArgs {
    std::string config;
    std::optional<std::string> csv;
    std::optional<std::string> base;  // overrides "base" in the config file
    CommonArgs common;
};

struct FrobeniusArgs {
    std::string system;
    int pole = 0;
    std::string t;  // JSON point or constant expression (one parameter)
    int order = 20;
    std::optional<double> growth_angle;
    std::size_t growth_samples = 16;
    CommonArgs common;
};

int cmd_monodromy(const MonodromyArgs& args, std::ostream& out, std::ostream& err);
int cmd_classify(const ClassifyArgs& args, std::ostream& out, std::ostream& err);
int cmd_integrable(const IntegrableArgs& args, std::ostream& out, std::ostream& err);
int cmd_halphen(const HalphenArgs& args, std::ostream& out, std::ostream& err);
int cmd_frobenius(const FrobeniusArgs& args, std::ostream& out, std::ostream& err);

}  // namespace parmono::cli
