/*
 * (C) Copyright 2026 the jloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "core/error.hpp"

namespace jloc {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require_io(in.good(), "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  require_io(!in.bad(), "read failed for " + path);
  return buf.str();
}

// Write-temp-then-rename so consumers never observe partial files.
inline void atomic_write(const std::string& path,
                         const std::function<void(std::ostream&)>& writer) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require_io(out.good(), "cannot open " + tmp.string() + " for writing");
    writer(out);
    out.flush();
    require_io(out.good(), "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  require_io(!ec, "rename failed for " + path + ": " + ec.message());
}

inline void atomic_write_text(const std::string& path, const std::string& content) {
  atomic_write(path, [&](std::ostream& out) { out << content; });
}

}  // namespace jloc
