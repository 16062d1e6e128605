#include "dualgap/cli.hpp"

int main(int argc, char** argv) { return dualgap::cli::run(argc, argv); }
