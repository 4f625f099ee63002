#ifndef ADIAMAG_REPORT_HPP
#define ADIAMAG_REPORT_HPP

#include <string>

#include <json.hpp>

namespace adiamag
{

using Json = nlohmann::ordered_json;

/// Serializes with insertion-ordered keys, two-space indentation and every
/// floating-point number printed with 17 significant digits. Non-finite
/// numbers become null.
std::string dump_json(const Json& value);

void write_json(const std::string& file, const Json& value);

}  // namespace adiamag

#endif  // ADIAMAG_REPORT_HPP
