#include "lowrank/cli.hpp"

int main(int argc, char** argv) { return lowrank::cli_run(argc, argv); }
