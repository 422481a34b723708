#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace walsh::toml {

/// Parsed TOML value with the 1-based line it was defined on. Tables keep
/// their keys in file order.
struct Value {
  enum class Type { boolean, integer, floating, string, array, table };

  Type type = Type::table;
  bool boolean = false;
  long long integer = 0;
  double floating = 0.0;
  std::string string;
  std::vector<Value> array;
  std::vector<std::pair<std::string, Value>> table;
  bool inline_table = false;
  int line = 0;

  bool is_number() const { return type == Type::integer || type == Type::floating; }
  double number() const { return type == Type::integer ? static_cast<double>(integer) : floating; }
  const Value* find(std::string_view key) const;
  Value* find(std::string_view key);

  friend bool operator==(const Value&, const Value&);
};

std::string type_name(Value::Type t);

/// Parses the supported subset: tables, arrays of tables, dotted keys,
/// basic and literal strings, integers, floats (including inf and nan),
/// booleans, multi-line arrays and inline tables. Errors are ConfigError with
/// the offending line.
Value parse(std::string_view text);

/// Canonical text form: scalar keys first, then sub-tables and arrays of tables.
std::string serialize(const Value& root);

}  // namespace walsh::toml
