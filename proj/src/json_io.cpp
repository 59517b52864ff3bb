#include "lowrank/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

#include "lowrank/errors.hpp"

namespace lowrank {

namespace {

void append_double(std::string& out, double x) {
  if (std::isnan(x)) {
    out += "\"nan\"";
    return;
  }
  if (std::isinf(x)) {
    out += x > 0.0 ? "\"inf\"" : "\"-inf\"";
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  out += buf;
}

bool is_scalar(const nlohmann::json& j) {
  return !j.is_array() && !j.is_object();
}

void append_value(std::string& out, const nlohmann::json& j, int depth) {
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  const std::string pad_in(static_cast<std::size_t>(depth + 1) * 2, ' ');

  switch (j.type()) {
    case nlohmann::json::value_t::null:
      out += "null";
      return;
    case nlohmann::json::value_t::boolean:
      out += j.get<bool>() ? "true" : "false";
      return;
    case nlohmann::json::value_t::number_integer:
      out += std::to_string(j.get<long long>());
      return;
    case nlohmann::json::value_t::number_unsigned:
      out += std::to_string(j.get<unsigned long long>());
      return;
    case nlohmann::json::value_t::number_float:
      append_double(out, j.get<double>());
      return;
    case nlohmann::json::value_t::string:
      out += nlohmann::json(j.get<std::string>()).dump();
      return;
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      bool flat = true;
      for (const auto& item : j) flat = flat && is_scalar(item);
      if (flat) {
        out += '[';
        bool first = true;
        for (const auto& item : j) {
          if (!first) out += ", ";
          first = false;
          append_value(out, item, depth);
        }
        out += ']';
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& item : j) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        append_value(out, item, depth + 1);
      }
      out += '\n';
      out += pad;
      out += ']';
      return;
    }
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        out += nlohmann::json(it.key()).dump();
        out += ": ";
        append_value(out, it.value(), depth + 1);
      }
      out += '\n';
      out += pad;
      out += '}';
      return;
    }
    default:
      throw contract_error("json_to_string: unsupported value type");
  }
}

}  // namespace

std::string json_to_string(const nlohmann::json& value) {
  std::string out;
  append_value(out, value, 0);
  out += '\n';
  return out;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open " + tmp + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw io_error("write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw io_error("cannot rename " + tmp + " to " + path + ": " +
                   std::strerror(errno));
  }
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw io_error("malformed JSON in " + path + ": " + e.what());
  }
}

}  // namespace lowrank
