#include "adiamag/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "adiamag/types.hpp"

namespace adiamag
{

namespace
{

void emit(const Json& v, std::string& out, int depth)
{
  const std::string pad(2 * static_cast<std::size_t>(depth + 1), ' ');
  const std::string close(2 * static_cast<std::size_t>(depth), ' ');
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, item] : v.items()) {
        if (!first) {
          out += ",\n";
        }
        first = false;
        out += pad + Json(key).dump() + ": ";
        emit(item, out, depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      // Short numeric arrays stay on one line.
      bool flat = v.size() <= 9;
      for (const auto& item : v) {
        flat = flat && item.is_primitive();
      }
      out += flat ? "[" : "[\n";
      bool first = true;
      for (const auto& item : v) {
        if (!first) {
          out += flat ? ", " : ",\n";
        }
        first = false;
        if (!flat) {
          out += pad;
        }
        emit(item, out, depth + 1);
      }
      out += flat ? "]" : "\n" + close + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double x = v.get<double>();
      if (!std::isfinite(x)) {
        out += "null";
        return;
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", x);
      out += buf;
      return;
    }
    default:
      out += v.dump();
      return;
  }
}

}  // namespace

std::string dump_json(const Json& value)
{
  std::string out;
  emit(value, out, 0);
  out += "\n";
  return out;
}

void write_json(const std::string& file, const Json& value)
{
  std::ofstream out(file, std::ios::binary);
  if (!out) {
    throw InputError("cannot write '" + file + "'");
  }
  out << dump_json(value);
}

}  // namespace adiamag
