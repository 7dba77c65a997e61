#include "decmps/cli.hpp"

int main(int argc, char** argv) { return decmps::run_cli(argc, argv); }
