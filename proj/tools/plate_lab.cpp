#include "platelab/cli.hpp"

int main(int argc, char** argv) { return platelab::run_cli(argc, argv); }
