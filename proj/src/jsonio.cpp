#include "gibbslab/jsonio.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gibbslab/error.hpp"

namespace gibbslab {

JsonValue JsonValue::boolean(bool v) {
  JsonValue j;
  j.kind_ = Kind::boolean;
  j.bool_ = v;
  return j;
}

JsonValue JsonValue::integer(std::int64_t v) {
  JsonValue j;
  j.kind_ = Kind::integer;
  j.int_ = v;
  return j;
}

JsonValue JsonValue::real(double v) {
  JsonValue j;
  j.kind_ = Kind::real;
  j.real_ = v;
  return j;
}

JsonValue JsonValue::string(std::string v) {
  JsonValue j;
  j.kind_ = Kind::string;
  j.string_ = std::move(v);
  return j;
}

JsonValue JsonValue::array() {
  JsonValue j;
  j.kind_ = Kind::array;
  return j;
}

JsonValue JsonValue::object() {
  JsonValue j;
  j.kind_ = Kind::object;
  return j;
}

JsonValue& JsonValue::push_back(JsonValue v) {
  require(kind_ == Kind::array, ErrorCode::internal, "push_back on non-array JSON value");
  array_.push_back(std::move(v));
  return *this;
}

JsonValue& JsonValue::set(const std::string& key, JsonValue v) {
  require(kind_ == Kind::object, ErrorCode::internal, "set on non-object JSON value");
  for (auto& entry : object_) {
    if (entry.first == key) {
      entry.second = std::move(v);
      return *this;
    }
  }
  object_.emplace_back(key, std::move(v));
  return *this;
}

JsonValue& JsonValue::set(const std::string& key, std::uint64_t v) {
  // Seeds may exceed int64; keep them exact by emitting unsigned text.
  if (v <= static_cast<std::uint64_t>(INT64_MAX)) return set(key, integer(static_cast<std::int64_t>(v)));
  return set(key, string(std::to_string(v)));
}

std::string format_double(double v) {
  if (std::isnan(v)) return "null";
  if (std::isinf(v)) return v > 0 ? "1e999" : "-1e999";
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", v);
  return buffer;
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buffer[8];
          std::snprintf(buffer, sizeof buffer, "\\u%04x", c);
          out += buffer;
        } else {
          out += c;
        }
    }
  }
  return out;
}

void JsonValue::write(std::string& out, int indent, int depth) const {
  const std::string pad(static_cast<std::size_t>(indent) * (depth + 1), ' ');
  const std::string closing_pad(static_cast<std::size_t>(indent) * depth, ' ');
  switch (kind_) {
    case Kind::null: out += "null"; return;
    case Kind::boolean: out += bool_ ? "true" : "false"; return;
    case Kind::integer: out += std::to_string(int_); return;
    case Kind::real: out += format_double(real_); return;
    case Kind::string:
      out += '"';
      out += json_escape(string_);
      out += '"';
      return;
    case Kind::array: {
      if (array_.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < array_.size(); ++i) {
        out += pad;
        array_[i].write(out, indent, depth + 1);
        if (i + 1 < array_.size()) out += ',';
        out += '\n';
      }
      out += closing_pad;
      out += ']';
      return;
    }
    case Kind::object: {
      if (object_.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      for (std::size_t i = 0; i < object_.size(); ++i) {
        out += pad;
        out += '"';
        out += json_escape(object_[i].first);
        out += "\": ";
        object_[i].second.write(out, indent, depth + 1);
        if (i + 1 < object_.size()) out += ',';
        out += '\n';
      }
      out += closing_pad;
      out += '}';
      return;
    }
  }
}

std::string JsonValue::dump(int indent) const {
  std::string out;
  write(out, indent, 0);
  out += '\n';
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream stream(path, std::ios::binary | std::ios::trunc);
  if (!stream) raise(ErrorCode::io_failure, "cannot open for writing: " + path);
  stream << content;
  stream.flush();
  if (!stream) raise(ErrorCode::io_failure, "write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream stream(path, std::ios::binary);
  if (!stream) raise(ErrorCode::io_failure, "cannot open for reading: " + path);
  std::ostringstream out;
  out << stream.rdbuf();
  return out.str();
}

CsvWriter::CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvWriter::add_row(const std::vector<double>& values) {
  require(values.size() == columns_.size(), ErrorCode::internal, "CSV row width mismatch");
  rows_.push_back(values);
}

std::string CsvWriter::dump() const {
  std::string out;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    out += columns_[i];
    if (i + 1 < columns_.size()) out += ',';
  }
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out += format_double(row[i]);
      if (i + 1 < row.size()) out += ',';
    }
    out += '\n';
  }
  return out;
}

}  // namespace gibbslab
