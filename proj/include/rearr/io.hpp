#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rearr/cylinder.hpp"
#include "rearr/rearrange1d.hpp"
#include "rearr/sets1d.hpp"
#include "rearr/weighted.hpp"
#include "rearr/weights.hpp"

namespace rearr {

using json = nlohmann::json;

/// number or "inf"
double extent_from_json(const json& j);
json extent_to_json(double alpha);

/// `x,f` CSV: header line, strictly increasing x, positive f.
std::vector<std::pair<double, double>> read_weight_csv(std::istream& in);
std::vector<std::pair<double, double>> read_weight_csv(const std::filesystem::path& path);

/// {"type": "power", "gamma": 1, "scale": 1, "alpha": "inf"}, "polynomial" with
/// "coefficients", "constant" with "value", "tabulated" with "nodes" or "csv",
/// "expression" with "expr" in the variable x. Relative csv paths resolve against base.
WeightSpec weight_from_json(const json& j, const std::filesystem::path& base = {});
json weight_to_json(const WeightSpec& w);

/// {"alpha": number|"inf", "points": [[x, u], ...]}
PiecewiseLinear1D piecewise_linear_from_json(const json& j);
json to_json(const PiecewiseLinear1D& u);

/// "(1,2)u(3,5)"; "" or "{}" is the empty set. Endpoints are parsed exactly.
IntervalUnion parse_interval_union(std::string_view text, double alpha = kInfinity);
std::string format_interval_union(const IntervalUnion& m);
/// Literal string or array of [a, b] pairs.
IntervalUnion interval_union_from_json(const json& j, double alpha = kInfinity);
json to_json(const IntervalUnion& m);

/// {"lower": [..], "upper": [..], "resolution": 9, "alpha": ..., "support_bound": ...}
CylinderDomain domain_from_json(const json& j);
json to_json(const CylinderDomain& d);

/// {"domain": {...}, "expression": "...", "y_nodes": 257} or {"domain": {...}, "columns": [[[y, u], ...], ...]}.
/// A resolution > 0 overrides the domain's (expression form only).
ColumnFunction column_function_from_json(const json& j, int resolution = 0);

/// {"alpha1": number|"inf", "w": <weight>, "closed_form_W": "...", "alpha": ..., "enforce_conditions": true}
WeightProfile profile_from_json(const json& j, const std::filesystem::path& base = {});

/// {"domain": {...}, "graph": {"g1": expr|[..], "g2": expr|[..]}} or {"domain": {...}, "cells": ["(a,b)u...", ...]}.
/// Graph expressions use x1..x{N-1}.
WeightedSetND weighted_set_from_json(const json& j, int resolution = 0);

json to_json(const ConditionReport& r);
json to_json(const InequalityReport& r);
json to_json(const RefinementReport& r);
json to_json(const JensenStep& s);

/// Reads a JSON document; throws InvalidInput naming the file on failure.
json read_json_file(const std::filesystem::path& path);
/// Writes through a temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace rearr
