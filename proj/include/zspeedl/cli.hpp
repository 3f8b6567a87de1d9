#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace zspeedl::cli {

// Runs one command; returns the process exit code (0 ok, 1 usage, 2 data,
// 3 numerical). Errors are reported on `err`, never thrown.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

// Thread count from ZSPEEDL_THREADS, else `fallback`.
unsigned threads_from_env(unsigned fallback);

}  // namespace zspeedl::cli
