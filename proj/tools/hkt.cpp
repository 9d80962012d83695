#include "hkt/cli.hpp"

int main(int argc, char** argv) { return hkt::cli::run(argc, argv); }
