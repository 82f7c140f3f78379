#ifndef GIBBSLAB_JSONIO_HPP
#define GIBBSLAB_JSONIO_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace gibbslab {

// Insertion-ordered JSON value with deterministic serialization: objects keep
// the order fields were added, floating-point values print with 17 significant
// digits. Used for every file the library emits, so byte-identical reruns
// reduce to deterministic computation.
class JsonValue {
public:
  enum class Kind { null, boolean, integer, real, string, array, object };

  JsonValue() : kind_(Kind::null) {}
  static JsonValue boolean(bool v);
  static JsonValue integer(std::int64_t v);
  static JsonValue real(double v);
  static JsonValue string(std::string v);
  static JsonValue array();
  static JsonValue object();

  Kind kind() const { return kind_; }

  JsonValue& push_back(JsonValue v);
  JsonValue& set(const std::string& key, JsonValue v);

  // Convenience setters for the common scalar cases.
  JsonValue& set(const std::string& key, bool v) { return set(key, boolean(v)); }
  JsonValue& set(const std::string& key, std::int64_t v) { return set(key, integer(v)); }
  JsonValue& set(const std::string& key, int v) { return set(key, integer(v)); }
  JsonValue& set(const std::string& key, std::uint64_t v);
  JsonValue& set(const std::string& key, double v) { return set(key, real(v)); }
  JsonValue& set(const std::string& key, const char* v) { return set(key, string(v)); }
  JsonValue& set(const std::string& key, const std::string& v) { return set(key, string(v)); }

  std::string dump(int indent = 2) const;

  const std::vector<std::pair<std::string, JsonValue>>& object_entries() const {
    return object_;
  }

private:
  void write(std::string& out, int indent, int depth) const;

  Kind kind_;
  bool bool_ = false;
  std::int64_t int_ = 0;
  double real_ = 0.0;
  std::string string_;
  std::vector<JsonValue> array_;
  std::vector<std::pair<std::string, JsonValue>> object_;
};

std::string format_double(double v);
std::string json_escape(const std::string& s);

// Writes text to path atomically enough for our purposes; throws io_failure.
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// CSV with a header row; all doubles formatted with 17 significant digits.
class CsvWriter {
public:
  explicit CsvWriter(std::vector<std::string> columns);
  void add_row(const std::vector<double>& values);
  std::string dump() const;

private:
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
};

}  // namespace gibbslab

#endif
