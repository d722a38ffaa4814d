/*
 * (C) Copyright 2026 the jloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace jloc {

enum class ErrorKind {
  InvalidArgument,  // bad call / bad config, maps to usage errors
  Dimension,        // shape / contract violation
  Data,             // malformed or inconsistent input files
  Io,               // filesystem failures
  Numeric,          // NaN/Inf or degenerate numerics
  Internal
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool cond, ErrorKind kind, const std::string& message) {
  if (!cond) raise(kind, message);
}

inline void require_arg(bool cond, const std::string& m) { require(cond, ErrorKind::InvalidArgument, m); }
inline void require_dim(bool cond, const std::string& m) { require(cond, ErrorKind::Dimension, m); }
inline void require_data(bool cond, const std::string& m) { require(cond, ErrorKind::Data, m); }
inline void require_io(bool cond, const std::string& m) { require(cond, ErrorKind::Io, m); }
inline void require_numeric(bool cond, const std::string& m) { require(cond, ErrorKind::Numeric, m); }

}  // namespace jloc
