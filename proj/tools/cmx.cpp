#include "cmx/bench.hpp"

int main(int argc, char** argv) { return cmx::bench::cli_main(argc, argv); }
