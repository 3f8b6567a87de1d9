#include "zspeedl/cli.hpp"

int main(int argc, char** argv) { return zspeedl::cli::run(argc, argv); }
