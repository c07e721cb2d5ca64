#include "zigev/cli.hpp"

int main(int argc, char** argv) { return zigev::cli::run(argc, argv); }
