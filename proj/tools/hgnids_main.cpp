#include "cli.hpp"

int main(int argc, char** argv) { return hgnids::cli::run(argc, argv); }
