#include "nwp/cli.hpp"

int main(int argc, char** argv) { return nwp::run_cli(argc, argv); }
