#include "walsh/toml.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>

#include "walsh/csv.hpp"
#include "walsh/error.hpp"

namespace walsh::toml {

const Value* Value::find(std::string_view key) const {
  for (const auto& [k, v] : table)
    if (k == key) return &v;
  return nullptr;
}

Value* Value::find(std::string_view key) {
  for (auto& [k, v] : table)
    if (k == key) return &v;
  return nullptr;
}

bool operator==(const Value& a, const Value& b) {
  if (a.type != b.type) return false;
  switch (a.type) {
    case Value::Type::boolean:
      return a.boolean == b.boolean;
    case Value::Type::integer:
      return a.integer == b.integer;
    case Value::Type::floating:
      return a.floating == b.floating || (std::isnan(a.floating) && std::isnan(b.floating));
    case Value::Type::string:
      return a.string == b.string;
    case Value::Type::array:
      return a.array == b.array;
    case Value::Type::table:
      return a.table == b.table;
  }
  return false;
}

std::string type_name(Value::Type t) {
  switch (t) {
    case Value::Type::boolean:
      return "boolean";
    case Value::Type::integer:
      return "integer";
    case Value::Type::floating:
      return "float";
    case Value::Type::string:
      return "string";
    case Value::Type::array:
      return "array";
    case Value::Type::table:
      return "table";
  }
  return "value";
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Value run() {
    Value root;
    root.line = 1;
    Value* current = &root;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        current = header(root);
      } else {
        key_value(*current);
      }
      end_of_line();
    }
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(what, line_); }

  bool eof() const { return pos_ >= text_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }
  char get() {
    const char c = text_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }

  void skip_space() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }
  void skip_comment() {
    if (peek() == '#')
      while (!eof() && peek() != '\n') ++pos_;
  }
  void skip_blank_lines() {
    while (!eof()) {
      skip_space();
      skip_comment();
      if (peek() == '\r') ++pos_;
      if (peek() == '\n')
        get();
      else
        break;
    }
  }
  // Whitespace, comments and newlines inside arrays.
  void skip_array_space() {
    while (!eof()) {
      skip_space();
      skip_comment();
      if (peek() == '\r' || peek() == '\n')
        get();
      else
        break;
    }
  }
  void end_of_line() {
    skip_space();
    skip_comment();
    if (peek() == '\r') ++pos_;
    if (eof()) return;
    if (peek() != '\n') fail(std::string("unexpected '") + peek() + "' after value");
    get();
  }

  std::string key_part() {
    skip_space();
    if (peek() == '"' || peek() == '\'') return string_literal();
    std::string key;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-'))
      key += text_[pos_++];
    if (key.empty()) fail("expected a key");
    return key;
  }

  std::vector<std::string> dotted_key() {
    std::vector<std::string> parts{key_part()};
    skip_space();
    while (peek() == '.') {
      ++pos_;
      parts.push_back(key_part());
      skip_space();
    }
    return parts;
  }

  Value* descend(Value& table, const std::string& key, bool create_implicit) {
    Value* child = table.find(key);
    if (!child) {
      if (!create_implicit) return nullptr;
      Value t;
      t.line = line_;
      table.table.emplace_back(key, std::move(t));
      return &table.table.back().second;
    }
    if (child->type == Value::Type::array && !child->array.empty() &&
        child->array.back().type == Value::Type::table && !child->array.back().inline_table)
      return &child->array.back();
    if (child->type != Value::Type::table || child->inline_table)
      fail("key '" + key + "' is not a table");
    return child;
  }

  Value* header(Value& root) {
    ++pos_;
    const bool array_of_tables = peek() == '[';
    if (array_of_tables) ++pos_;
    const auto parts = dotted_key();
    for (int k = array_of_tables ? 2 : 1; k > 0; --k) {
      if (peek() != ']') fail("malformed table header");
      ++pos_;
    }
    Value* t = &root;
    std::string path;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      t = descend(*t, parts[i], true);
      path += parts[i];
      if (const auto it = array_counts_.find(path); it != array_counts_.end())
        path += "#" + std::to_string(it->second);
      path += ".";
    }
    const std::string& last = parts.back();
    path += last;
    Value* existing = t->find(last);
    if (array_of_tables) {
      if (!existing) {
        Value arr;
        arr.type = Value::Type::array;
        arr.line = line_;
        t->table.emplace_back(last, std::move(arr));
        existing = &t->table.back().second;
      } else if (existing->type != Value::Type::array) {
        fail("'" + last + "' is not an array of tables");
      }
      Value fresh;
      fresh.line = line_;
      existing->array.push_back(std::move(fresh));
      ++array_counts_[path];
      return &existing->array.back();
    }
    if (existing) {
      if (existing->type != Value::Type::table || existing->inline_table || defined(path))
        fail("table '" + last + "' defined twice");
      defined_.push_back(path);
      return existing;
    }
    Value fresh;
    fresh.line = line_;
    t->table.emplace_back(last, std::move(fresh));
    defined_.push_back(path);
    return &t->table.back().second;
  }

  // Header paths already defined, to reject duplicates. Elements of arrays of
  // tables are told apart by their index.
  std::vector<std::string> defined_;
  std::map<std::string, std::size_t> array_counts_;
  bool defined(const std::string& path) const {
    for (const auto& d : defined_)
      if (d == path) return true;
    return false;
  }
  void key_value(Value& table) {
    const int line = line_;
    const auto parts = dotted_key();
    skip_space();
    if (get() != '=') {
      line_ = line;
      fail("expected '=' after key '" + parts.back() + "'");
    }
    skip_space();
    Value v = value();
    v.line = line;
    Value* t = &table;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) t = descend(*t, parts[i], true);
    if (t->find(parts.back())) {
      line_ = line;
      fail("duplicate key '" + parts.back() + "'");
    }
    t->table.emplace_back(parts.back(), std::move(v));
  }

  std::string string_literal() {
    const char quote = get();
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = get();
      if (c == quote) break;
      if (c == '\\' && quote == '"') {
        const char e = get();
        switch (e) {
          case 'n':
            out += '\n';
            break;
          case 't':
            out += '\t';
            break;
          case 'r':
            out += '\r';
            break;
          case '"':
            out += '"';
            break;
          case '\\':
            out += '\\';
            break;
          default:
            fail(std::string("unsupported escape '\\") + e + "'");
        }
      } else {
        out += c;
      }
    }
    return out;
  }

  Value value() {
    Value v;
    v.line = line_;
    const char c = peek();
    if (c == '"' || c == '\'') {
      v.type = Value::Type::string;
      v.string = string_literal();
      return v;
    }
    if (c == '[') return array();
    if (c == '{') return inline_table();
    std::string token;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '.' ||
                      peek() == '+' || peek() == '-' || peek() == '_'))
      token += text_[pos_++];
    if (token.empty()) fail("expected a value");
    if (token == "true" || token == "false") {
      v.type = Value::Type::boolean;
      v.boolean = token == "true";
      return v;
    }
    std::string digits;
    for (char ch : token)
      if (ch != '_') digits += ch;
    if (digits == "inf" || digits == "+inf" || digits == "-inf" || digits == "nan" ||
        digits == "+nan" || digits == "-nan") {
      v.type = Value::Type::floating;
      v.floating = digits.find("nan") != std::string::npos
                       ? std::numeric_limits<double>::quiet_NaN()
                       : (digits[0] == '-' ? -1.0 : 1.0) * std::numeric_limits<double>::infinity();
      return v;
    }
    const bool is_float = digits.find_first_of(".eE") != std::string::npos;
    const char* b = digits.data();
    const char* e = digits.data() + digits.size();
    if (*b == '+') ++b;
    if (is_float) {
      v.type = Value::Type::floating;
      auto [p, ec] = std::from_chars(b, e, v.floating);
      if (ec != std::errc() || p != e) fail("invalid number '" + token + "'");
    } else {
      v.type = Value::Type::integer;
      auto [p, ec] = std::from_chars(b, e, v.integer);
      if (ec != std::errc() || p != e) fail("invalid value '" + token + "'");
    }
    return v;
  }

  Value array() {
    Value v;
    v.type = Value::Type::array;
    v.line = line_;
    ++pos_;
    while (true) {
      skip_array_space();
      if (eof()) fail("unterminated array");
      if (peek() == ']') {
        ++pos_;
        return v;
      }
      Value item = value();
      v.array.push_back(std::move(item));
      skip_array_space();
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != ']') {
        fail("expected ',' or ']' in array");
      }
    }
  }

  Value inline_table() {
    Value v;
    v.type = Value::Type::table;
    v.inline_table = true;
    v.line = line_;
    ++pos_;
    skip_space();
    if (peek() == '}') {
      ++pos_;
      return v;
    }
    while (true) {
      key_value(v);
      skip_space();
      const char c = eof() ? '\0' : get();
      if (c == '}') return v;
      if (c != ',') fail("expected ',' or '}' in inline table");
      skip_space();
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

bool is_bare(const std::string& key) {
  if (key.empty()) return false;
  for (char c : key)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  return true;
}

std::string quote_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\t':
        out += "\\t";
        break;
      case '\r':
        out += "\\r";
        break;
      default:
        out += c;
    }
  }
  return out + "\"";
}

std::string key_text(const std::string& key) { return is_bare(key) ? key : quote_string(key); }

std::string inline_text(const Value& v) {
  switch (v.type) {
    case Value::Type::boolean:
      return v.boolean ? "true" : "false";
    case Value::Type::integer:
      return std::to_string(v.integer);
    case Value::Type::floating: {
      if (std::isnan(v.floating)) return "nan";
      std::string s = csv::format_double(v.floating);
      if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
      return s;
    }
    case Value::Type::string:
      return quote_string(v.string);
    case Value::Type::array: {
      std::string s = "[";
      for (std::size_t i = 0; i < v.array.size(); ++i) s += (i ? ", " : "") + inline_text(v.array[i]);
      return s + "]";
    }
    case Value::Type::table: {
      std::string s = "{";
      for (std::size_t i = 0; i < v.table.size(); ++i)
        s += (i ? ", " : " ") + key_text(v.table[i].first) + " = " + inline_text(v.table[i].second);
      return s + (v.table.empty() ? "}" : " }");
    }
  }
  return "";
}

bool is_section(const Value& v) { return v.type == Value::Type::table && !v.inline_table; }
bool is_table_array(const Value& v) {
  if (v.type != Value::Type::array || v.array.empty()) return false;
  for (const Value& e : v.array)
    if (!is_section(e)) return false;
  return true;
}

void emit(std::string& out, const Value& table, const std::string& prefix) {
  for (const auto& [k, v] : table.table)
    if (!is_section(v) && !is_table_array(v)) out += key_text(k) + " = " + inline_text(v) + "\n";
  for (const auto& [k, v] : table.table) {
    const std::string name = prefix.empty() ? key_text(k) : prefix + "." + key_text(k);
    if (is_section(v)) {
      out += "\n[" + name + "]\n";
      emit(out, v, name);
    } else if (is_table_array(v)) {
      for (const Value& e : v.array) {
        out += "\n[[" + name + "]]\n";
        emit(out, e, name);
      }
    }
  }
}

}  // namespace

Value parse(std::string_view text) { return Parser(text).run(); }

std::string serialize(const Value& root) {
  std::string out;
  emit(out, root, "");
  if (!out.empty() && out.front() == '\n') out.erase(0, 1);
  return out;
}

}  // namespace walsh::toml
