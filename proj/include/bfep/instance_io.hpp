#pragma once

#include <stdexcept>
#include <string>

#include "bfep/instance.hpp"

namespace bfep {

/// Malformed JSON text; carries the 1-based line/column of the failure.
struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, int line_, int column_)
      : std::runtime_error(msg), line(line_), column(column_) {}
  int line = 0;
  int column = 0;
};

/// Structurally valid JSON that does not match the instance schema; carries
/// the JSON path of the offending element. Unknown fields are rejected.
struct SchemaError : std::runtime_error {
  SchemaError(const std::string& msg, std::string path_)
      : std::runtime_error(msg + " at " + path_), path(std::move(path_)) {}
  std::string path;
};

Instance load_instance(const std::string& bytes);
std::string save_instance(const Instance& inst);

Instance load_instance_file(const std::string& path);
void save_instance_file(const Instance& inst, const std::string& path);

}  // namespace bfep
