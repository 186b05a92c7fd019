#pragma once

#include <string>

#include <json.hpp>

namespace gazekit {

using OrderedJson = nlohmann::ordered_json;

/// Serialises with insertion-ordered keys and every float printed with 17
/// significant digits, so equal values always produce identical bytes.
/// `indent` < 0 gives a single line.
std::string dump_json(const OrderedJson& value, int indent = -1);

/// 17-significant-digit rendering used for all floating-point output.
std::string format_double(double v);

}  // namespace gazekit
