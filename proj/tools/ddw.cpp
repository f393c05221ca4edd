#include "ddw/cli.hpp"

int main(int argc, char** argv) { return ddw::cli::run(argc, argv); }
