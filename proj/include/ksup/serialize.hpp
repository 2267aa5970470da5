#pragma once

#include "ksup/engine.hpp"
#include "ksup/monotone.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace ksup {

using nlohmann::json;

// Doubles are written so that reading them back gives the same bits;
// non-finite values become the strings "inf", "-inf", "nan".
json num(double v);
double num(const json& j);

json to_json(const PL1D& f);
PL1D pl1d_from_json(const json& j);

json to_json(const PlateauFunction& f);
PlateauFunction plateau_from_json(const json& j);

json to_json(const Scheme& s);
Scheme scheme_from_json(const json& j);

json to_json(const WeightMatrix& w);
WeightMatrix weights_from_json(const json& j);

json to_json(const StageRecord& r);
StageRecord stage_record_from_json(const json& j);

json to_json(const Representation& rep);
Representation representation_from_json(const json& j);

void save_json(const json& j, const std::filesystem::path& path);

/// Same document as to_json(rep), written piecewise so that the knot arrays
/// never exist as a json tree.
void save_representation(const Representation& rep, const std::filesystem::path& path);
json load_json(const std::filesystem::path& path);

/// k, eta_k, delta_k, M_k0..M_kT, h_norm, gamma_min, radius, budget_spent,
/// then the budget, knot count and attempts. The final residual gets its own
/// row with the stage columns left empty.
void write_trace_csv(const Representation& rep, const std::filesystem::path& path);

/// Parameters, status, notes and the trace; the representation itself is
/// referenced by file name.
json make_report(const Representation& rep, const std::string& representation_file);

} // namespace ksup
