#include "abil/cli.hpp"

int main(int argc, char** argv) { return abil::run_cli(argc, argv); }
