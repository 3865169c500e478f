#include "r2d/cli.hpp"

int main(int argc, char** argv) { return r2d::cli::run_main(argc, argv); }
