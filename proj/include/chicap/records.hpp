#pragma once

#include "chicap/additivity.hpp"
#include "chicap/shor.hpp"

#include <json.hpp>

#include <string>

namespace chicap::records {

using Json = nlohmann::json;

// Matrix literal: list of rows, each entry [re, im] (a bare number is read as a real entry).
Matrix parse_matrix(const Json& j);
Json to_json(const Matrix& m);

// {family, params} | {kraus: [matrix]}; entanglement-breaking families keep their measure-prepare form.
KrausChannel parse_channel(const Json& j);
// {blocks: [{weight, channel}]} or any single-channel record.
BlockChannel parse_block_channel(const Json& j);
bool is_block_record(const Json& j);

// {type: full | linear | singleton | marginals}. Marginals take optional dh, dk; missing factor
// dimensions are inferred from the factor records and `din`.
ConstraintSet parse_constraint(const Json& j, std::size_t din);

DensityMatrix parse_state(const Json& j);
// {weights: [...], states: [matrix]}.
Ensemble parse_ensemble(const Json& j);
Json to_json(const Ensemble& e);

// {base: channel, effect: matrix, q, d}.
ShorExtension parse_extension(const Json& j);

// Decimal value rounded to 9 significant digits.
double round9(double v);

Json to_json(const CapacityResult& r);
Json to_json(const GapReport& r, const Json& instance);
Json to_json(const Prop3Report& r, std::size_t d);
Json to_json(const AlphaProfile& p);

}  // namespace chicap::records
