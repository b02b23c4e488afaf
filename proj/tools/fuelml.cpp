#include "fuelml/cli.hpp"

int main(int argc, char** argv) { return fuelml::cli::main(argc, argv); }
