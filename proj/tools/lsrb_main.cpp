#include "lsrb/cli.hpp"

int main(int argc, char** argv) { return lsrb::run_cli(argc, argv); }
