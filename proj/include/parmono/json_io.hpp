#pragma once

// JSON formats. Complex numbers are written as [re, im]; on input a complex
// value may also be a plain number or a constant expression string.

#include <string>
#include <vector>

#include <json.hpp>

#include "parmono/classify.hpp"
#include "parmono/halphen.hpp"
#include "parmono/local.hpp"
#include "parmono/monodromy.hpp"
#include "parmono/system.hpp"

namespace parmono {

using json = nlohmann::ordered_json;

/// Throws FILE_NOT_FOUND, INVALID_INPUT.
[[nodiscard]] json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

[[nodiscard]] cplx complex_from_json(const json& j);
[[nodiscard]] json to_json(cplx z);
[[nodiscard]] CMatrix matrix_from_json(const json& j);
[[nodiscard]] json to_json(const CMatrix& m);
[[nodiscard]] ParameterPoint point_from_json(const json& j, int num_params);
[[nodiscard]] json to_json(const ParameterPoint& t);

/// {"dimension", "num_params", "poles": [{"location", "laurent": highest order
/// first}], "poly": [x^0, x^1, ...]}. Identically zero coefficients are pruned.
[[nodiscard]] ParamRationalMatrix system_from_json(const json& j);
[[nodiscard]] json to_json(const ParamRationalMatrix& a);
[[nodiscard]] ParamRationalMatrix load_system(const std::string& path);

/// A system object plus "A_t": one {"poles", "poly"} object per parameter.
[[nodiscard]] IntegrableSystemSpec integrable_from_json(const json& j);
[[nodiscard]] IntegrableSystemSpec load_integrable(const std::string& path);

/// {"points": [point, ...]} or {"start": point, "end": point, "steps": n}.
[[nodiscard]] TGrid grid_from_json(const json& j, int num_params);
[[nodiscard]] TGrid load_grid(const std::string& path, int num_params);

/// Loop index -1 denotes the loop around infinity.
[[nodiscard]] json to_json(const MonodromyRecord& r);
[[nodiscard]] json to_json(const ClassificationReport& r);
[[nodiscard]] json to_json(const ProjectiveSplitReport& r);
[[nodiscard]] json to_json(const LocalSolution& s, const ResidualSlope& slope);

[[nodiscard]] HalphenConfig halphen_config_from_json(const json& j);
[[nodiscard]] HalphenConfig load_halphen_config(const std::string& path);
[[nodiscard]] json to_json(const EvolutionReport& r);

}  // namespace parmono
